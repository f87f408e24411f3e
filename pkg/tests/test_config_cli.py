import json

import numpy as np
import pytest

from momentprobe.cli.config import (
    apply_overrides,
    build_process,
    load_config_file,
    validate_config,
)
from momentprobe.cli.main import main
from momentprobe.errors import ConfigError
from momentprobe.moments import MomentTable, coherent_moments
from momentprobe.processes import (
    NLA,
    Attenuation,
    BeamSplitter,
    Displacement,
    GaussianChannel,
    GaussianTriplet,
    catalog_tensor,
)
from momentprobe.serialize import (
    canonical_json,
    moment_table_from_dict,
    moment_table_to_csv,
    moment_table_to_dict,
    process_tensor_from_dict,
    process_tensor_to_csv,
    process_tensor_to_dict,
    triplet_from_dict,
    triplet_to_csv,
    triplet_to_dict,
)


def test_load_toml_config(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text('[process]\nkind = "attenuation"\neta = 0.7\n')
    data = load_config_file(str(p))
    assert data["process"]["eta"] == 0.7


def test_load_json_config(tmp_path):
    p = tmp_path / "run.json"
    p.write_text('{"process": {"kind": "identity"}}')
    assert load_config_file(str(p))["process"]["kind"] == "identity"


def test_missing_config_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config_file("/nonexistent/run.toml")


def test_unknown_config_extension(tmp_path):
    p = tmp_path / "run.yml"
    p.write_text("a: 1\n")
    with pytest.raises(ConfigError, match="extension"):
        load_config_file(str(p))


def test_malformed_toml(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text("[process\nkind=\n")
    with pytest.raises(ConfigError, match="cannot parse"):
        load_config_file(str(p))


def test_overrides_parse_json_literals():
    data = {"process": {"kind": "attenuation", "eta": 0.7}}
    apply_overrides(data, ["--process.eta=0.5", "--noise.sigma=1e-6",
                           "--plan.radii=[0.2, 0.5, 1.0]",
                           "--output.path=report.json"])
    assert data["process"]["eta"] == 0.5
    assert data["noise"]["sigma"] == 1e-6
    assert data["plan"]["radii"] == [0.2, 0.5, 1.0]
    # not valid JSON, kept as plain string
    assert data["output"]["path"] == "report.json"


def test_overrides_create_nested_tables():
    data = {}
    apply_overrides(data, ["a.b.c=3"])
    assert data == {"a": {"b": {"c": 3}}}


@pytest.mark.parametrize("bad", ["novalue", "=5", "--=5"])
def test_overrides_reject_bad_forms(bad):
    with pytest.raises(ConfigError):
        apply_overrides({}, [bad])


def test_build_process_each_kind():
    assert isinstance(build_process({"kind": "attenuation", "eta": 0.7}),
                      Attenuation)
    d = build_process({"kind": "displacement", "beta": [0.3, 0.2]})
    assert isinstance(d, Displacement)
    assert d.beta == 0.3 + 0.2j
    d2 = build_process({"kind": "displacement", "beta": "0.3+0.2j"})
    assert d2.beta == 0.3 + 0.2j
    n = build_process({"kind": "nla", "gain": 1.2, "scissors": 8})
    assert isinstance(n, NLA)
    assert n.vacuum_branch is True
    bs = build_process({"kind": "beam_splitter", "t": 0.8, "r": 0.6})
    assert isinstance(bs, BeamSplitter)
    g = build_process({"kind": "gaussian",
                       "S": [[0.7, 0.0], [0.0, 0.7]],
                       "E_noise": [[0.1, 0.0], [0.0, 0.1]],
                       "D": [0.0, 0.0]})
    assert isinstance(g, GaussianChannel)


def test_build_process_reports_field_paths():
    with pytest.raises(ConfigError, match="process.kind"):
        build_process({"kind": "squeeze"})
    with pytest.raises(ConfigError, match="process.eta"):
        build_process({"kind": "attenuation"})
    with pytest.raises(ConfigError, match="process.beta"):
        build_process({"kind": "displacement"})
    with pytest.raises(ConfigError, match="process.beta"):
        build_process({"kind": "displacement", "beta": "zip"})
    with pytest.raises(ConfigError, match="S"):
        build_process({"kind": "gaussian"})


def test_validate_config_field_errors():
    with pytest.raises(ConfigError, match="experiment"):
        validate_config({"experiment": "teleport"})
    with pytest.raises(ConfigError, match="process: required"):
        validate_config({"experiment": "tomography"})
    with pytest.raises(ConfigError, match="noise.sigma"):
        validate_config({"experiment": "catalog_dump",
                         "process": {"kind": "identity"},
                         "noise": {"sigma": -1.0}})
    with pytest.raises(ConfigError, match="output.format"):
        validate_config({"experiment": "catalog_dump",
                         "process": {"kind": "identity"},
                         "output": {"format": "xml"}})


def test_validate_config_cutoff_shapes():
    base = {"experiment": "catalog_dump", "process": {"kind": "identity"}}
    c = validate_config({**base, "cutoffs": 3})
    assert c.cutoff_out == (3,) and c.cutoff_in == (3,)
    c = validate_config({**base, "cutoffs": [3, 5]})
    assert c.cutoff_out == (3,) and c.cutoff_in == (5,)
    c = validate_config({**base, "cutoffs": {"out": 2, "in": 4}})
    assert c.cutoff_out == (2,) and c.cutoff_in == (4,)
    two = {"experiment": "catalog_dump",
           "process": {"kind": "beam_splitter", "t": 0.8, "r": 0.6}}
    c = validate_config({**two, "cutoffs": {"out": [1, 2], "in": 2}})
    assert c.cutoff_out == (1, 2) and c.cutoff_in == (2, 2)
    with pytest.raises(ConfigError, match="cutoffs"):
        validate_config({**base, "cutoffs": [1, 2, 3]})


def test_validate_config_plan_must_cover_cutoff():
    data = {"experiment": "tomography", "process": {"kind": "identity"},
            "cutoffs": 3, "plan": {"max_order": 4}}
    with pytest.raises(ConfigError, match="plan.max_order"):
        validate_config(data)


def test_canonical_json_layout():
    text = canonical_json({"b": 1, "a": [1, 2, 3], "f": 0.1,
                           "nested": {"x": True, "y": None}})
    # insertion order, not sorted
    assert text.index('"b"') < text.index('"a"')
    assert '"a": [1, 2, 3]' in text
    assert "0.10000000000000001" in text
    assert '"x": true' in text
    assert '"y": null' in text
    assert text.endswith("}\n")


def test_canonical_json_rejects_non_finite():
    with pytest.raises(ValueError, match="non-finite"):
        canonical_json({"x": float("nan")})
    with pytest.raises(ValueError, match="non-finite"):
        canonical_json({"x": float("inf")})


def test_canonical_json_rejects_unknown_types():
    with pytest.raises(TypeError, match="serialize"):
        canonical_json({"x": {1, 2}})


def test_moment_table_dict_round_trip():
    table = coherent_moments(0.4 + 0.3j, cutoff=3)
    data = moment_table_to_dict(table)
    back = moment_table_from_dict(data)
    assert back.modes == table.modes
    assert back.cutoff == table.cutoff
    for key, v in table.entries.items():
        assert np.allclose(back.entries[key], v)


def test_moment_table_dict_drops_negligible_entries():
    table = MomentTable(1, (1,), {((0,), (0,)): 1.0, ((1,), (0,)): 1e-17})
    data = moment_table_to_dict(table)
    assert len(data["entries"]) == 1
    assert data["cutoff"] == 1


def test_process_tensor_dict_round_trip_two_modes():
    spec = BeamSplitter(t=0.8, r=0.6)
    tensor = catalog_tensor(spec, ((1, 1), (1, 1)))
    back = process_tensor_from_dict(process_tensor_to_dict(tensor))
    assert back.modes == 2
    assert back.cutoff_in == tensor.cutoff_in
    for key, v in tensor.entries.items():
        assert np.allclose(back.entries[key], v)


def test_triplet_round_trip_and_csv():
    t = GaussianTriplet(np.array([[0.7, 0.1], [0.0, 0.7]]),
                        np.array([[0.2, 0.0], [0.0, 0.2]]),
                        np.array([0.3, -0.1]))
    data = triplet_to_dict(t, cond=2.5)
    assert data["cond"] == 2.5
    back = triplet_from_dict(data)
    assert np.allclose(back.scale, t.scale)
    assert np.allclose(back.noise, t.noise)
    assert np.allclose(back.shift, t.shift)
    csv_body = triplet_to_csv(t)
    assert csv_body.splitlines()[0] == "field,row,col,value"
    assert "D,0,,0.2999" in csv_body


def test_csv_headers_name_per_mode_columns():
    single = catalog_tensor(Attenuation(eta=0.7), ((1,), (1,)))
    assert process_tensor_to_csv(single).splitlines()[0] == "j,k,m,n,re,im"
    double = catalog_tensor(BeamSplitter(t=0.8, r=0.6), ((1, 1), (1, 1)))
    header = process_tensor_to_csv(double).splitlines()[0]
    assert header == "j1,j2,k1,k2,m1,m2,n1,n2,re,im"
    table_csv = moment_table_to_csv(coherent_moments(0.5, cutoff=1))
    assert table_csv.splitlines()[0] == "j,k,re,im"


def _write_catalog_config(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text('[process]\nkind = "attenuation"\neta = 0.7\n'
                 "[cutoffs]\nout = 2\nin = 2\n")
    return p


def test_cli_catalog_writes_report(tmp_path, capsys):
    cfg = _write_catalog_config(tmp_path)
    out = tmp_path / "report.json"
    code = main(["catalog", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    assert "ok: catalog_dump" in capsys.readouterr().err
    data = json.loads(out.read_text())
    assert data["experiment"] == "catalog_dump"
    rows = {tuple(e["jk"] + e["mn"]): e["re"] for e in data["tensor"]["entries"]}
    assert np.allclose(rows[(1, 1, 1, 1)], 0.49)


def test_cli_override_changes_result(tmp_path):
    cfg = _write_catalog_config(tmp_path)
    out = tmp_path / "report.json"
    code = main(["catalog", "--config", str(cfg), "--out", str(out),
                 "--process.eta=0.5"])
    assert code == 0
    data = json.loads(out.read_text())
    rows = {tuple(e["jk"] + e["mn"]): e["re"] for e in data["tensor"]["entries"]}
    assert np.allclose(rows[(1, 1, 1, 1)], 0.25)


def test_cli_csv_format(tmp_path, capsys):
    cfg = _write_catalog_config(tmp_path)
    code = main(["catalog", "--config", str(cfg), "--format", "csv"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "j,k,m,n,re,im"
    assert len(lines) > 1


def test_cli_tomography_round_trip(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('[process]\nkind = "identity"\n[cutoffs]\nout = 1\nin = 1\n')
    out = tmp_path / "report.json"
    code = main(["tomography", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    err = capsys.readouterr().err
    assert "ok: tomography max_abs_error=" in err
    data = json.loads(out.read_text())
    assert data["comparison"]["max_abs_error"] < 1e-10


def test_cli_diagnose(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('[process]\nkind = "displacement"\nbeta = [0.6, 0.0]\n')
    out = tmp_path / "report.json"
    code = main(["diagnose", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert abs(data["diagnostics"]["mandel_q"]) < 1e-9
    assert data["probe"] == [1.0, 0.0]


def test_cli_bad_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('[process]\nkind = "squeeze"\n')
    code = main(["catalog", "--config", str(cfg)])
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("error: config:")
    assert err.count("\n") == 1


def test_cli_missing_config_exits_2(tmp_path):
    assert main(["catalog", "--config", str(tmp_path / "nope.toml")]) == 2


def test_cli_numerical_failure_exits_3(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "process": {"kind": "attenuation", "eta": 0.7},
        "probes": [[0.0, 0.0], [1.0, 0.0]],
    }))
    code = main(["gaussian-id", "--config", str(cfg)])
    assert code == 3
    assert "error:" in capsys.readouterr().err


def test_cli_rejects_stray_arguments(capsys):
    assert main(["catalog", "bogus"]) == 2
    assert "unrecognized" in capsys.readouterr().err


def test_cli_verify_rejects_overrides(capsys):
    assert main(["verify", "--process.eta=0.5"]) == 2
    assert "verify takes no overrides" in capsys.readouterr().err


def test_cli_verify_rejects_csv(capsys):
    assert main(["verify", "--format", "csv"]) == 2
    assert "json only" in capsys.readouterr().err
