import os
import sys
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))


def pytest_collection_modifyitems(config, items):
    if os.environ.get('ENTROSCOPE_ACCEPTANCE') == '1':
        return
    skip = pytest.mark.skip(reason='set ENTROSCOPE_ACCEPTANCE=1 to run reproduction sweeps')
    for item in items:
        if 'acceptance' in item.keywords:
            item.add_marker(skip)
