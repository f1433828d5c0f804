"""
Export manifest summaries and training curves to CSV files
"""
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from pathlib import Path

from gan.train import moving_average, read_metrics
from pipeline.manifest import manifest_frame, read_manifest
from pipeline.settings import INSMIX_MANIFEST, INSMIX_METRICS_CSV, INSMIX_OUTPUT_DIR


def export_metrics(out_dir='data', window=100):
    """Write per-sample, per-input and training summaries"""

    print("\n📁 Exporting InsMix summaries to CSV files...")
    print("=" * 60)
    os.makedirs(out_dir, exist_ok=True)

    manifest = Path(INSMIX_OUTPUT_DIR) / INSMIX_MANIFEST
    if manifest.is_file():
        samples = manifest_frame(read_manifest(manifest))
        per_input = samples.groupby("input_id")[["placements", "target_count", "shortfall", "shuffled_cells"]].sum().reset_index()
        exports = {"augmented_samples.csv": samples, "per_input_summary.csv": per_input}
        for filename, df in exports.items():
            df.to_csv(os.path.join(out_dir, filename), index=False)
            print(f"  ✓ Exported {filename} ({len(df)} rows)")
    else:
        print(f"  ❌ No manifest at {manifest}")

    if os.path.isfile(INSMIX_METRICS_CSV):
        metrics = read_metrics(INSMIX_METRICS_CSV)
        for column in ("loss_d", "loss_adv", "recon"):
            metrics[f"{column}_ma"] = moving_average(metrics, column, window)
        metrics.to_csv(os.path.join(out_dir, "training_curves.csv"), index=False)
        print(f"  ✓ Exported training_curves.csv ({len(metrics)} rows)")
    else:
        print(f"  ❌ No training metrics at {INSMIX_METRICS_CSV}")

    print("\n✅ Export finished")
    print(f"📂 Files saved in: {os.path.abspath(out_dir)}")


if __name__ == "__main__":
    export_metrics()
