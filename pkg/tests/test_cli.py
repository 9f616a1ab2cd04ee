import math
import textwrap

import numpy as np
import pytest

from photon_detect.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_OK, main, run
from photon_detect.config import parse_config
from photon_detect.errors import ConfigurationError
from photon_detect.table import ResultTable, parse_table, read_table, render_table, write_table

MINIMAL_LINESHAPE = """
[lineshape]
omega = 1.0
window_length = 10.0
grid_min = -0.5
grid_max = 0.5
grid_points = 101
"""


def _write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


def test_minimal_lineshape_defaults(tmp_path):
    cfg = parse_config(_write(tmp_path, MINIMAL_LINESHAPE), "lineshape")
    assert cfg.experiment == "lineshape"
    echo = cfg.echo()["lineshape"]
    assert echo["dipole"] == [1.0, 0.0, 0.0]
    assert echo["coupling"] == 0.01 and echo["volume"] == 1.0
    assert cfg.setup.detuning_grid[0] == -0.5 and len(cfg.setup.detuning_grid) == 101


def test_two_experiment_sections(tmp_path):
    path = _write(tmp_path, MINIMAL_LINESHAPE + "\n[mzi]\nhalf_angle = 0.5\n")
    with pytest.raises(ConfigurationError, match="exactly one"):
        parse_config(path)


@pytest.mark.parametrize("body, key", [
    ("[modes]\nvolume = -1.0\n[povm_check]\n", "modes.volume"),
    ("[lineshape]\nomega = 1.0\nwindow_length = 0.0\n", "lineshape.window_length"),
    ("[mzi]\nhalf_angle = 2.0\n", "mzi.half_angle"),
    ("[mzi]\nbogus = 1\n", "mzi.bogus"),
    ("[atom]\ngap = nan\n[povm_check]\n", "atom.gap"),
    ("[atom]\ndipole_e = [0.0, 0.0, 0.0]\n[povm_check]\n", "atom"),
])
def test_validation_names_key(tmp_path, body, key):
    with pytest.raises(ConfigurationError, match=key.replace(".", r"\.")):
        parse_config(_write(tmp_path, body))


def test_subcommand_must_match(tmp_path):
    with pytest.raises(ConfigurationError, match="subcommand"):
        parse_config(_write(tmp_path, MINIMAL_LINESHAPE), "mzi")


def test_invalid_toml(tmp_path):
    with pytest.raises(ConfigurationError, match="TOML"):
        parse_config(_write(tmp_path, "[lineshape\nomega = 1"))


def test_exit_codes(tmp_path, capsys):
    good = _write(tmp_path, MINIMAL_LINESHAPE)
    assert main(["lineshape", "--config", str(good), "--out", str(tmp_path / "o.csv")]) == EXIT_OK
    bad = _write(tmp_path, "[modes]\nvolume = -1.0\n[povm_check]\n", "bad.toml")
    assert main(["povm-check", "--config", str(bad)]) == EXIT_CONFIG
    blind = _write(tmp_path, "[mzi]\ndetector_kind = 'electric'\norientation = [1.0, 0.0, 0.0]\n", "blind.toml")
    assert main(["mzi", "--config", str(blind)]) == EXIT_NUMERIC
    assert main(["lineshape", "--config", str(tmp_path / "missing.toml")]) == EXIT_IO
    assert main(["lineshape", "--config", str(good), "--out", str(tmp_path / "no" / "dir.csv")]) == EXIT_IO
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 4 and all(line.startswith("photon-detect: ") for line in err)


def test_round_trip_exact(tmp_path, rng):
    vals = np.concatenate([rng.normal(size=20) * 10.0 ** rng.integers(-300, 300, size=20),
                           [0.1, 1 / 3, -0.0, 5e-324, 1.7976931348623157e308]])
    table = ResultTable(["a", "b", "c", "d", "e"], vals.reshape(5, 5).tolist(),
                        {"tool": "x", "config": '{"a":1}'}, {"V": 1 / 7})
    path = tmp_path / "t.csv"
    write_table(table, path)
    back = read_table(path)
    assert back.columns == table.columns
    assert back.rows == table.rows
    assert back.footer == table.footer and back.provenance == table.provenance


def test_empty_table():
    text = render_table(ResultTable(["x", "probability"], [], {"tool": "t"}))
    assert text == "# tool: t\nx,probability\n"
    assert parse_table(text).rows == []


def test_hash_tracks_config(tmp_path):
    a = parse_config(_write(tmp_path, MINIMAL_LINESHAPE, "a.toml"))
    same = parse_config(_write(tmp_path, "# comment\n" + MINIMAL_LINESHAPE.replace("1.0", "1.00"), "b.toml"))
    other = parse_config(_write(tmp_path, MINIMAL_LINESHAPE.replace("grid_points = 101", "grid_points = 102"), "c.toml"))
    # explicit default equals implicit default
    explicit = parse_config(_write(tmp_path, MINIMAL_LINESHAPE + "coupling = 0.01\n", "d.toml"))
    assert a.digest() == same.digest() == explicit.digest()
    assert a.digest() != other.digest()


def test_reproducible_output_is_byte_identical(tmp_path):
    cfg = _write(tmp_path, MINIMAL_LINESHAPE)
    outs = []
    for name in ("1.csv", "2.csv"):
        assert main(["lineshape", "--config", str(cfg), "--out", str(tmp_path / name), "--reproducible"]) == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    assert b"generated" not in outs[0]
    assert main(["lineshape", "--config", str(cfg), "--out", str(tmp_path / "3.csv")]) == 0
    stamped = (tmp_path / "3.csv").read_text().splitlines()
    assert any(line.startswith("# generated: ") for line in stamped)
    assert [l for l in stamped if not l.startswith("# generated")] == outs[0].decode().splitlines()


def test_output_path_from_config(tmp_path):
    target = tmp_path / "from_config.csv"
    cfg = _write(tmp_path, MINIMAL_LINESHAPE + f"\n[output]\npath = '{target}'\n")
    assert main(["lineshape", "--config", str(cfg), "--reproducible"]) == 0
    assert read_table(target).columns[0] == "detuning"


def test_schemas(tmp_path):
    line = run(parse_config(_write(tmp_path, MINIMAL_LINESHAPE, "l.toml")))
    assert line.columns == ["detuning", "probability", "analytic_reference"]
    assert "fwhm_times_T" in line.footer
    mzi = run(parse_config(_write(tmp_path, "[mzi]\n", "m.toml")))
    assert mzi.columns == ["x", "probability"] and len(mzi.rows) == 256
    assert set(mzi.footer) == {"V", "D"}
    text = render_table(mzi)
    assert text.splitlines()[-2].startswith("# V=") and text.splitlines()[-1].startswith("# D=")
    povm = run(parse_config(_write(tmp_path, "[povm_check]\n", "p.toml")))
    assert povm.columns == ["sum_p", "deviation"] and len(povm.rows) == 1
    assert povm.provenance["experiment"] == "povm-check"
    assert len(povm.provenance["config_sha256"]) == 64


def test_commutator_run(tmp_path):
    body = """
    [modes]
    wavevectors = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]]
    polarization = 1

    [commutator]
    times = [0.0, 1.7]
    points = [{j = 1, k = 2, x = [0.0, 0.0, 0.0], y = [0.3, 0.1, 0.0]}]
    """
    table = run(parse_config(_write(tmp_path, body)))
    assert len(table.rows) == 2
    assert table.footer["max_difference"] <= 1e-12


def test_shipped_configs_parse():
    import pathlib
    root = pathlib.Path(__file__).resolve().parents[1] / "configs"
    names = {p.stem: p for p in root.glob("*.toml")}
    assert names
    for path in names.values():
        cfg = parse_config(path)
        assert cfg.experiment in path.stem.replace("_", "-") or path.stem.startswith(cfg.experiment)
        assert math.isfinite(len(cfg.digest()))
