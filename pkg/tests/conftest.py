"""Shared fixtures: canonical games and bundled config paths."""

from pathlib import Path

import pytest

from teamrep import PayoffKernel, TeamGame, make_builtin

REPO_ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = REPO_ROOT / "configs"


@pytest.fixture(scope="session")
def matching_pennies() -> PayoffKernel:
    return PayoffKernel(1, -1, -1, 1)


@pytest.fixture(scope="session")
def rescaled_kernel() -> PayoffKernel:
    return PayoffKernel(1, 0, 0, 1)


@pytest.fixture(scope="session")
def xor_xor_mp(matching_pennies) -> TeamGame:
    return TeamGame(make_builtin("XOR", 2), make_builtin("XOR", 2), matching_pennies)


@pytest.fixture(scope="session")
def or_or_mp(matching_pennies) -> TeamGame:
    return TeamGame(make_builtin("OR", 2), make_builtin("OR", 2), matching_pennies)


@pytest.fixture(scope="session")
def single_gene_mp(matching_pennies) -> TeamGame:
    return TeamGame(
        make_builtin("IDENTITY", 1), make_builtin("IDENTITY", 1), matching_pennies
    )


@pytest.fixture(scope="session")
def config_dir() -> Path:
    return CONFIG_DIR
