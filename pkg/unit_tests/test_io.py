import toml

from rabisense.utils.io import (
    RECORD_HEADER,
    RunManifest,
    ensure_dir,
    read_csv,
    read_record_csv,
    write_csv,
)

import pytest

from rabisense.utils.errors import ConfigError


def test_csv_cells(tmp_path):
    path = write_csv(str(tmp_path / "t.csv"), ("a", "b", "c"), [(0.1, True, None), (3, False, 1e-6)])
    assert open(path).read() == "a,b,c\n0.1,true,\n3,false,1e-06\n"
    assert read_csv(path)[1] == {"a": "3", "b": "false", "c": "1e-06"}


def test_csv_rejects_ragged_rows(tmp_path):
    with pytest.raises(ValueError):
        write_csv(str(tmp_path / "t.csv"), ("a", "b"), [(1,)])


def test_record_file(tmp_path):
    path = write_csv(str(tmp_path / "r.csv"), RECORD_HEADER, [(0.01, -3.5), (0.02, -7.0)])
    assert read_record_csv(path) == [(0.01, -3.5), (0.02, -7.0)]
    other = write_csv(str(tmp_path / "o.csv"), ("x",), [(1,)])
    with pytest.raises(ConfigError):
        read_record_csv(other)


def test_manifest_roundtrip(tmp_path):
    manifest = RunManifest(
        subcommand="fit",
        params={"num_particles": 100, "temperatures": (0.0, 300.0), "time": None},
        seed=4,
        outputs=["fit.csv"],
        metadata={"chi2": 1.5},
        version="0.1.0",
    )
    doc = toml.load(manifest.write(str(tmp_path / "fit.manifest.toml")))
    assert doc["run"] == {"subcommand": "fit", "seed": 4, "version": "0.1.0", "outputs": ["fit.csv"]}
    assert doc["params"] == {"num_particles": 100, "temperatures": [0.0, 300.0]}
    assert doc["metadata"]["chi2"] == 1.5


def test_ensure_dir(tmp_path):
    target = tmp_path / "a" / "b"
    assert ensure_dir(str(target)) == str(target)
    assert target.is_dir()
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ConfigError):
        ensure_dir(str(blocker / "sub"))
