import pytest

from lerwkit.potential import shared_table


@pytest.fixture(scope="session")
def big_table():
    """One exact potential table serving every test (radius covers the
    window-200 seam sums: 2*(200+5)+4 = 414 <= 512)."""
    return shared_table(512)
