"""
Environment settings
Read once from the process environment and an optional .env file
"""
import os
from typing import Optional

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

INSMIX_DATA_DIR = os.getenv('INSMIX_DATA_DIR', 'data/train')
INSMIX_OUTPUT_DIR = os.getenv('INSMIX_OUTPUT_DIR', 'data/augmented')
INSMIX_MANIFEST = os.getenv('INSMIX_MANIFEST', 'manifest.jsonl')
INSMIX_METRICS_CSV = os.getenv('INSMIX_METRICS_CSV', 'data/gan_metrics.csv')
INSMIX_API_URL = os.getenv('INSMIX_API_URL', 'http://localhost:8000')
INSMIX_LOG_LEVEL = os.getenv('INSMIX_LOG_LEVEL', 'INFO')
INSMIX_WORKERS = int(os.getenv('INSMIX_WORKERS', '1'))


def seed_override() -> Optional[int]:
    """INSMIX_SEED, read at call time so tests can set it per case"""
    raw = os.getenv('INSMIX_SEED')
    if raw is None or raw.strip() == '':
        return None
    return int(raw, 0)
