"""
Run the stage ablation variants and display per-variant summaries
"""
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import argparse

from pipeline.ablation import run_ablation
from pipeline.config import load_config


def main():
    parser = argparse.ArgumentParser(description="Run paste / SSD / perturb / smooth ablation variants")
    parser.add_argument("--config", required=True)
    args = parser.parse_args()

    print("\n" + "=" * 80)
    print("🚀 INSMIX - STAGE ABLATION")
    print("=" * 80)

    try:
        cfg = load_config(args.config)
        df = run_ablation(cfg)
    except Exception as e:
        print(f"❌ Ablation failed: {e}")
        sys.exit(1)

    print("\n" + "=" * 80)
    print("📊 Variant summary")
    print("=" * 80)
    print(df.to_string(index=False))
    print(f"\n✅ {int((df['status'] == 'ok').sum())} of {len(df)} variants completed")
    print(f"📂 Outputs under: {os.path.abspath(cfg.output_dir)}")


if __name__ == "__main__":
    main()
