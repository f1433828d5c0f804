"""
Data Generation Script
Writes a synthetic two-palette ellipse nuclei dataset for the augmentation pipeline
"""

import sys
import os
import argparse
from datetime import datetime

import pandas as pd

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dataset.instances import extract_instances
from dataset.store import DatasetStore
from dataset.synthetic import generate_synthetic_dataset
from pipeline.settings import INSMIX_DATA_DIR


class DataGenerator:
    """Generates and saves synthetic image / label-map pairs"""

    def __init__(self, out_dir=INSMIX_DATA_DIR, n_images=16, size=64, seed=42):
        self.store = DatasetStore(out_dir)
        self.n_images = n_images
        self.size = size
        self.seed = seed
        self.images = []

        print("🚀 Data Generator Initialized")
        print("Target:")
        print(f"  - Images: {self.n_images}")
        print(f"  - Size: {self.size}×{self.size}")
        print(f"  - Seed: {self.seed}")
        print(f"  - Output: {self.store.root}")
        print("=" * 60)

    def clear_existing(self):
        """Remove previously generated pairs"""
        if not self.store.root.is_dir():
            return
        removed = 0
        for pair in self.store.pairs():
            pair.image_path.unlink()
            pair.label_path.unlink()
            removed += 1
        print(f"🗑️  Removed {removed} existing pairs")

    def generate_images(self):
        print("🧫 Generating synthetic nuclei...")
        self.images = generate_synthetic_dataset(self.n_images, size=(self.size, self.size), seed=self.seed)
        for img in self.images:
            self.store.save(img)
        print(f"  ✓ Wrote {len(self.images)} image / label pairs")

    def generate_summary(self):
        rows = [
            {"image": img.id, "instances": len(inst), "foreground_px": int(img.foreground.sum()),
             "mean_area": sum(i.area for i in inst) / max(len(inst), 1)}
            for img, inst in ((img, extract_instances(img)) for img in self.images)
        ]
        df = pd.DataFrame(rows)
        print("\n" + "=" * 60)
        print("📈 DATA GENERATION SUMMARY")
        print("=" * 60)
        print(df.to_string(index=False))
        print(f"\n  Total instances:................ {int(df['instances'].sum())}")
        print("=" * 60)

    def run(self, clear_existing=True):
        """Run complete data generation process"""
        start_time = datetime.now()
        try:
            if clear_existing:
                self.clear_existing()
            self.generate_images()
            self.generate_summary()
            duration = (datetime.now() - start_time).total_seconds()
            print(f"\n⏱️  Total Time: {duration:.2f} seconds")
            print("✅ Data generation completed successfully!")
        except Exception as e:
            print(f"\n❌ Data generation failed: {e}")
            raise


def main():
    parser = argparse.ArgumentParser(description="Generate a synthetic nuclei dataset")
    parser.add_argument("--out", default=INSMIX_DATA_DIR)
    parser.add_argument("--images", type=int, default=16)
    parser.add_argument("--size", type=int, default=64)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--keep", action="store_true", help="do not remove existing pairs")
    args = parser.parse_args()

    print("\n" + "=" * 60)
    print("INSMIX - SYNTHETIC DATA GENERATOR")
    print("=" * 60)
    DataGenerator(args.out, args.images, args.size, args.seed).run(clear_existing=not args.keep)


if __name__ == "__main__":
    main()
