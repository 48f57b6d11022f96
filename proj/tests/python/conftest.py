# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2026 The qcnet Authors

import os
import shutil
import subprocess
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
DATA = Path(os.environ.get("QCNET_EXAMPLES", HERE.parent / "data"))


def _cli_path():
    env = os.environ.get("QCNET_CLI")
    if env:
        return env
    return shutil.which("qcnet")


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def cli():
    exe = _cli_path()
    if not exe:
        pytest.skip("qcnet executable not found (set QCNET_CLI)")

    def run(*args, check=None, env=None):
        full_env = dict(os.environ)
        full_env.pop("QCNET_SEED", None)
        if env:
            full_env.update(env)
        proc = subprocess.run([exe, *map(str, args)], capture_output=True, text=True, env=full_env)
        if check is not None:
            assert proc.returncode == check, proc.stdout + proc.stderr
        return proc

    return run
