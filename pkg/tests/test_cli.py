import argparse
import json

import pytest

from smrlmt.catalog import catalog_path
from smrlmt.cli import main, parse_duration
from smrlmt.fixture import serve_fixture


@pytest.fixture(scope="module")
def v1_site():
    with serve_fixture(["V1"]) as fx:
        yield fx


def crawl_to(site, tmp_path):
    target = tmp_path / "target.toml"
    target.write_text(site.target_toml())
    site.reset()
    assert main(["crawl", "--target", str(target), "--out", str(tmp_path / "pool")]) == 0
    return target, tmp_path / "pool"


def test_durations():
    assert parse_duration("90") == 90 and parse_duration("10m") == 600 and parse_duration("24h") == 86400
    with pytest.raises(argparse.ArgumentTypeError):
        parse_duration("soon")


def test_check_clean_catalog_is_silent(capsys):
    assert main(["check", str(catalog_path("otg_authz_002.smrl"))]) == 0
    assert capsys.readouterr().out == ""


def test_check_reports_diagnostics(tmp_path, capsys):
    bad = tmp_path / "bad.smrl"
    bad.write_text("MR X {\n  NOT(nope);\n}\n")
    assert main(["check", str(bad)]) == 2
    assert f"{bad}:2:7: error: unresolved variable nope" in capsys.readouterr().out


def test_usage_errors():
    with pytest.raises(SystemExit) as e:
        main(["test"])
    assert e.value.code == 2
    assert main(["check", "/no/such/file.smrl"]) == 2


def test_catalog_list(capsys):
    assert main(["catalog", "list"]) == 0
    names = [line.split()[0] for line in capsys.readouterr().out.splitlines()]
    assert names == ["OTG_AUTHN_001", "OTG_AUTHZ_001", "OTG_AUTHZ_002", "OTG_SESS_003"]
    assert main(["catalog", "list", "--all"]) == 0
    assert "OTG_SESS_008" in capsys.readouterr().out


def test_crawl_refuses_existing_pool(patched_site, tmp_path):
    target, pool = crawl_to(patched_site, tmp_path)
    assert json.loads((pool / "inputs.json").read_text())
    assert main(["crawl", "--target", str(target), "--out", str(pool)]) == 2


def test_campaign_exit_codes_and_report(patched_site, v1_site, tmp_path, capsys):
    for site, expected in ((patched_site, 0), (v1_site, 1)):
        d = tmp_path / str(expected)
        d.mkdir()
        target, pool = crawl_to(site, d)
        report = d / "campaign.json"
        site.reset()
        code = main(
            ["test", "--pool", str(pool), "--target", str(target), "--relations", "OTG_AUTHZ_002", "--report", str(report), "--transcript", str(d / "t.ndjson")]
        )
        assert code == expected
        data = json.loads(report.read_text())
        assert data["summary"]["runs"] == 20 * 3
        assert (d / "t.ndjson").read_text().count("\n") > 0
        capsys.readouterr()
        assert main(["report", str(report)]) == 0
        out = capsys.readouterr().out
        assert "OTG_AUTHZ_002" in out
        if expected:
            assert "/admin/startSlave" in out


def test_workers_need_a_stateless_target(patched_site, tmp_path):
    target, pool = crawl_to(patched_site, tmp_path)
    assert main(["test", "--pool", str(pool), "--target", str(target), "--workers", "2"]) == 2
