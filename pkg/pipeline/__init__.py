"""
End-to-end orchestration: config, seeded per-sample execution, manifest, verify, CLI
"""
