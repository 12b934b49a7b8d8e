import csv

import numpy as np
import pytest

from robconn.cli import main
from robconn.config import load_scenario, parse_scenario
from robconn.errors import ConfigInvalid

K2 = """
[graph]
n_agents = 2
edges = [[1, 2]]

[potential]
kind = linear

[controller]
R = 1.0
R_tilde = {R_tilde}
delta_scale = {scale}

[disturbance]
kind = adversarial

[sim]
t_end = {t_end}
positions = [[0.0, 0.0], [{gap}, 0.0]]
"""


def k2(tmp_path, R_tilde=0.9, scale=1.0, t_end=5.0, gap=None, name="k2.ini"):
    path = tmp_path / name
    path.write_text(K2.format(R_tilde=R_tilde, scale=scale, t_end=t_end, gap=R_tilde if gap is None else gap))
    return path


RANDOM = """
[graph]
n_agents = 5
topology = ring

[potential]
kind = piecewise_nl

[controller]
R = 2.0

[domain]
radius = 10
epsilon = 0.5
h = power
h_exponent = 2

[disturbance]
kind = sinusoid
frequency = 0.5

[sim]
t_end = 1
initial = random
dim = 3
seed = 4
fill = 0.8
"""


def test_parse_defaults_and_build():
    sc = parse_scenario(RANDOM)
    assert sc.values["controller"]["R_tilde"] == "max"
    assert sc.values["disturbance"]["magnitude"] == "delta"
    cfg = sc.build()
    assert cfg.net.n_edges == 5 and cfg.dim == 3
    assert cfg.params.R_tilde == pytest.approx(2.0 * (2 / 14) ** (1 / 3))
    cfg.validate()


def test_dump_round_trip(tmp_path):
    sc = parse_scenario(RANDOM)
    text = sc.dump()
    again = parse_scenario(text)
    assert again.values == sc.values
    assert again.dump() == text
    path = tmp_path / "n.ini"
    assert main(["check", str(k2(tmp_path)), "--dump-normalized", str(path)]) == 0
    assert load_scenario(path).values == load_scenario(k2(tmp_path)).values


@pytest.mark.parametrize("text,match", [
    ("[graph]\nn_agents=2\n", "missing section"),
    (RANDOM + "\n[extra]\na=1\n", "unknown section"),
    (RANDOM.replace("seed = 4", "seed = 4\nspeed = 3"), "unknown key"),
    (RANDOM.replace("topology = ring", "topology = ring\nedges = [[1,2]]"), "exactly one"),
    (RANDOM.replace("kind = piecewise_nl", "kind = cubic"), "expected one of"),
    (RANDOM.replace("R = 2.0", "R = two"), "R"),
    ("not an ini file", "cannot parse"),
])
def test_parse_errors(text, match):
    with pytest.raises(ConfigInvalid, match=match):
        parse_scenario(text)


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv("ROBCONN_SEED", "123")
    sc = parse_scenario(RANDOM)
    assert sc.seed == 123
    x123 = sc.build().x0
    monkeypatch.delenv("ROBCONN_SEED")
    sc = parse_scenario(RANDOM)
    assert sc.seed == 4
    assert not np.array_equal(sc.build().x0, x123)
    np.testing.assert_array_equal(sc.build().x0, parse_scenario(RANDOM).build().x0)


def test_custom_table_relative_path(tmp_path):
    (tmp_path / "w.csv").write_text("s,r\n0,1\n1,1\n6,2\n")
    text = RANDOM.replace("kind = piecewise_nl", "kind = custom\ntable = w.csv")
    path = tmp_path / "c.ini"
    path.write_text(text)
    cfg = load_scenario(path).build()
    assert cfg.pot.kind == "custom" and cfg.params.delta > 0


def test_check_exit_codes(tmp_path, capsys):
    assert main(["check", str(k2(tmp_path))]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "disturbance_bound" in out
    assert main(["check", str(k2(tmp_path, R_tilde=1.0, name="eq.ini"))]) == 1
    out = capsys.readouterr().out
    assert "initial_radius_order" in out and "FAIL" in out
    bad = tmp_path / "bad.ini"
    bad.write_text("[graph\n")
    assert main(["check", str(bad)]) == 2
    assert main(["check", str(tmp_path / "missing.ini")]) == 2


def test_check_disconnected(tmp_path, capsys):
    path = tmp_path / "d.ini"
    path.write_text(K2.format(R_tilde=0.5, scale=1, t_end=1, gap=0.5).replace("n_agents = 2", "n_agents = 3")
                    .replace("[0.5, 0.0]]", "[0.5, 0.0], [0.2, 0.0]]"))
    assert main(["check", str(path)]) == 1
    assert "graph_connected" in capsys.readouterr().out


def test_simulate(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    assert main(["simulate", str(k2(tmp_path)), "-o", str(out)]) == 0
    assert "violations=0" in capsys.readouterr().out
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert max(float(r["dx_inf"]) for r in rows) <= 1.0
    assert main(["simulate", str(k2(tmp_path, scale=100.0, R_tilde=0.99, name="bad.ini")), "-o", str(out)]) == 1
    assert "connectivity_violation" in capsys.readouterr().out
    assert main(["simulate", str(k2(tmp_path, t_end=0, name="z.ini")), "-o", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 2


def test_simulate_rejects_ich_violation(tmp_path, capsys):
    assert main(["simulate", str(k2(tmp_path, gap=0.95)), "-o", str(tmp_path / "t.csv")]) == 2
    assert "exceeds R_tilde" in capsys.readouterr().err


def test_verify_commands(tmp_path, capsys, monkeypatch):
    assert main(["verify", "--budget", "0"]) == 0
    assert "vacuous" in capsys.readouterr().out
    assert main(["verify", "--budget", "100", "--inject-tolerance", "1.0"]) == 1
    monkeypatch.setenv("ROBCONN_SEED", "9")
    out = tmp_path / "v.csv"
    assert main(["verify", "--budget", "200", "-o", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "fact,samples,worst_margin,pass"


def test_verify_default_budget():
    assert main(["verify", "--seed", "42"]) == 0


@pytest.mark.parametrize("M,rows,last", [(150, 150, None), (1, 1, 1.0), (12, 12, 0.7494719668673)])
def test_ratio(tmp_path, M, rows, last):
    out = tmp_path / "r.csv"
    assert main(["ratio", "--max", str(M), "-o", str(out)]) == 0
    with open(out) as fh:
        table = list(csv.reader(fh))[1:]
    assert len(table) == rows
    values = [float(v) for _, v in table]
    assert values[0] == 1.0
    assert all(a > b for a, b in zip(values, values[1:]))
    if last is not None:
        assert values[-1] == pytest.approx(last, rel=1e-12)


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    assert main(["ratio", "--max", "0", "-o", "/dev/null"]) == 2
