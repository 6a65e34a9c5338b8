from __future__ import annotations

import io
import json
import os
from pathlib import Path

import pytest

from dysonrank.cli import main
from dysonrank.series import QExp
from dysonrank import qfunctions as qf

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("DYSONRANK_REGEN_GOLDEN") == "1"


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "seconds"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def check_golden(name: str, text: str):
    data = _strip_timing(json.loads(text))
    path = GOLDEN / f"{name}.json"
    if REGEN:
        path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n")
    assert data == json.loads(path.read_text())


def test_rank_table_mod7():
    code, text = run("rank-table", "--n", "10", "--mod", "7")
    assert code == 0
    rows = json.loads(text)["result"]["rows"]
    assert rows["5"] == [1] * 7
    check_golden("rank_table_n10_mod7", text)


def test_rank_table_methods_agree():
    outs = [json.loads(run("rank-table", "--n", "25", "--mod", "5", "--method", m)[1])["result"]["rows"] for m in ("box", "enumerate", "series")]
    assert outs[0] == outs[1] == outs[2]


def test_rank_table_csv():
    code, text = run("rank-table", "--n", "4", "--mod", "5", "--format", "csv")
    lines = text.strip().splitlines()
    assert code == 0 and lines[0] == "n,r0,r1,r2,r3,r4" and lines[-1] == "4,1,1,1,1,1"


def test_qexpand_round_trip():
    code, text = run("qexpand", "Phi 5 2", "--prec", "20")
    assert code == 0
    f = QExp.from_json(json.loads(text)["result"])
    assert f == qf.phi_series(5, 2, 20)
    assert f.coefficient(0).is_zero() and f.leading_exponent() == 2
    check_golden("qexpand_phi_5_2", text)


def test_dissect():
    code, text = run("dissect", "partitions", "--prec", "40", "--mod", "5", "--residue", "4")
    assert code == 0
    f = QExp.from_json(json.loads(text)["result"]["4"])
    assert all(int(c.coeffs[0]) % 5 == 0 for _, c in f.items())


def test_verify_exit_codes():
    code, text = run("verify", "dyson-5", "--prec", "200")
    assert code == 0 and json.loads(text)["result"]["status"] == "verified"
    check_golden("verify_dyson_5", text)
    assert run("verify", "no-such-identity")[0] == 2


def test_verify_idempotent_and_monotone():
    a = _strip_timing(json.loads(run("verify", "theta1id-7", "--prec", "12")[1]))
    b = _strip_timing(json.loads(run("verify", "theta1id-7", "--prec", "12")[1]))
    c = json.loads(run("verify", "theta1id-7", "--prec", "20")[1])
    assert a == b and c["result"]["status"] == "verified"


def test_usage_errors():
    assert run("qexpand", "Bogus 1", "--prec", "5")[0] == 2
    assert run("qexpand", "Phi 5", "--prec", "5")[0] == 2
    assert run("audit-valence", "--p", "9")[0] == 2
    assert run("audit-valence", "--p", "11")[0] == 2
    assert run("rank-table", "--n", "500", "--mod", "5")[0] == 2
    assert run("rank-table", "--n", "10", "--mod", "6", "--method", "series")[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("check-transform", "NoLaw", "--params", "1,5")[0] == 2
    assert run("check-transform", "Ntrans1", "--params", "1,5", "--point", "0.2-1j")[0] == 2


def test_audit_valence():
    for args, name in [(("--p", "5"), "audit_p5"), (("--p", "7"), "audit_p7"), (("--identity", "rank-11"), "audit_rank11"), (("--identity", "rank-13"), "audit_rank13")]:
        code, text = run("audit-valence", *args)
        assert code == 0
        check_golden(name, text)
    res = json.loads(run("audit-valence", "--p", "5")[1])["result"]
    assert res["forces_vanishing"] and res["mu_k_over_12"] == "1"


def test_cusp_orders():
    code, text = run("cusp-orders")
    assert code == 0
    res = json.loads(text)["result"]
    assert res["cusps"]["2/11"]["ord"] == ["1", "2", "2", "2", "3"]
    check_golden("cusp_orders_j11", text)
    code, text = run("cusp-orders", "--eta", "25:1,1:-1", "--p", "5")
    assert json.loads(text)["result"]["cusps"]["0"]["ord"] == ["-1/25"]


def test_check_transform_single_law():
    code, text = run("check-transform", "Ntrans1", "--params", "1,5", "--point", "0.25+1j", "--point", "1j")
    data = json.loads(text)
    assert code == 0 and data["passed"] and len(data["result"]) == 2


def test_check_transform_csv():
    code, text = run("check-transform", "tt2", "--params", "1,2,5", "--format", "csv")
    lines = text.strip().splitlines()
    assert code == 0 and lines[0].startswith("law,params,re_z,im_z") and len(lines) == 4


def test_check_transform_failure_exit():
    # an absurd tolerance makes the comparison fail
    code, _ = run("check-transform", "Ntrans1", "--params", "1,5", "--point", "1j", "--tol", "0")
    assert code == 1


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('format = "csv"\n[rank-table]\nmethod = "enumerate"\n')
    code, text = run("--config", str(cfg), "rank-table", "--n", "5", "--mod", "7")
    assert code == 0 and text.splitlines()[-1] == "5,1,1,1,1,1,1,1"
    cfg.write_text("[rank-table]\nbogus = 1\n")
    assert run("--config", str(cfg), "rank-table", "--n", "5", "--mod", "7")[0] == 2


def test_report_deterministic(monkeypatch):
    from dysonrank import identities as ids

    fast = {"dyson-5": lambda prec=60: ids.verify_dyson(5, prec), "theta1id-5": lambda prec=8: ids.verify_theta1id(5, prec)}
    monkeypatch.setattr(ids, "VERIFIERS", fast)
    a = _strip_timing(json.loads(run("report", "--seed", "7")[1]))
    b = _strip_timing(json.loads(run("report", "--seed", "7")[1]))
    assert a == b and a["passed"]
    assert a["result"]["multipliers"]["13"]["cocycle_failures"] == 0
