from __future__ import annotations

import pytest

from nsp_waves.acceptance import AcceptanceContext


@pytest.fixture(scope="session")
def ctx() -> AcceptanceContext:
    """One shared cache for everything expensive (profile, cell histories)."""
    return AcceptanceContext()


@pytest.fixture(scope="session")
def profile(ctx):
    return ctx.profile


@pytest.fixture(scope="session")
def connection(ctx):
    return ctx.connection
