"""
Dashboard API Client - Connects to the InsMix FastAPI backend
"""
import os
from typing import Any, Dict, List, Optional

import pandas as pd
import requests
import streamlit as st

# API Base URL - reads from environment variable or defaults to localhost
API_BASE_URL = os.getenv('INSMIX_API_URL', 'http://localhost:8000')


class InsMixApiClient:
    """Client to interact with the InsMix API"""

    def __init__(self, base_url: str = API_BASE_URL, timeout: float = 10):
        self.base_url = base_url
        self.timeout = timeout

    def get_json(self, endpoint: str, params: Optional[Dict] = None) -> Optional[Dict[str, Any]]:
        """GET request; errors are shown in the page and yield None"""
        try:
            response = requests.get(f"{self.base_url}{endpoint}", params=params, timeout=self.timeout)
            response.raise_for_status()
            return response.json()
        except requests.exceptions.ConnectionError:
            st.error(f"❌ Cannot connect to API at {self.base_url}")
            st.info("Make sure the InsMix API is running!")
        except requests.exceptions.HTTPError as e:
            detail = e.response.json().get("detail", str(e)) if e.response is not None else str(e)
            st.warning(f"⚠️ {endpoint}: {detail}")
        except Exception as e:
            st.error(f"API Error: {str(e)}")
        return None

    def get(self, endpoint: str, params: Optional[Dict] = None) -> List[Dict]:
        """First list found in the response wrapper"""
        data = self.get_json(endpoint, params)
        if isinstance(data, dict):
            for key in data:
                if isinstance(data[key], list):
                    return data[key]
        return data or []

    def frame(self, endpoint: str, params: Optional[Dict] = None) -> pd.DataFrame:
        return pd.DataFrame(self.get(endpoint, params))

    @staticmethod
    def placements_frame(records: List[Dict]) -> pd.DataFrame:
        """One row per placement across manifest records"""
        rows = []
        for rec in records:
            for p in rec.get("placements", []):
                rows.append({
                    "sample": rec["output_image"],
                    "input_id": rec["input_id"],
                    "template": f"{p['template_source']}:{p['template_label']}",
                    "anchor": p["anchor"],
                    "new_label": p["new_label"],
                    "target_x": p["target"][0],
                    "target_y": p["target"][1],
                    "rot90_k": p["transform"].get("rot90_k", 0),
                })
        return pd.DataFrame(rows)


# Global client instance
api = InsMixApiClient()
