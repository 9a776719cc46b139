import json

import pytest
import yaml
from typer.testing import CliRunner

from tuniv import __version__
from tuniv.errors import EXIT_FAILED, EXIT_INVALID, EXIT_OK
from tuniv.files import CertificateFile, ContinuityFile, SeriesFile, load_config, read_document
from tuniv.main import app

runner = CliRunner()

ONE_TASK = {
    "family": {"kind": "radii"},
    "tasks": [{"j": 2, "p": 1, "l": 1, "s": 2, "t": 8}],
    "search": {"k_max": 64, "n_max": 64},
}


def write_config(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


def invoke(*args):
    return runner.invoke(app, [str(arg) for arg in args])


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    folder = tmp_path_factory.mktemp("build")
    config = write_config(folder / "config.yaml", ONE_TASK)
    result = invoke("build", "--config", config, "--out", folder / "series.json", "--report", folder / "certs.json")
    return folder, config, result


def test_version():
    result = invoke("--version")
    assert result.exit_code == EXIT_OK
    assert __version__ in result.stdout


#!------------------ enum show ------------------!#


def test_first_polynomial_is_zero():
    result = invoke("enum", "show", "--kind", "poly", "--index", 1)
    assert result.exit_code == EXIT_OK
    shown = json.loads(result.stdout)
    assert shown["coefficients"] == []
    assert shown["text"] == "0"


@pytest.mark.parametrize(
    "kind, index, field, expected",
    [
        ("scale", 32, "value", "1/64"),
        ("rational", 3, "value", "-1"),
        ("boundary", 2, "value", [-1.0, pytest.approx(0.0, abs=1e-15)]),
        ("tuple", 2, "value", [1, 1, 1, 1, 1, 2]),
    ],
)
def test_enum_show(kind, index, field, expected):
    result = invoke("enum", "show", "--kind", kind, "--index", index)
    assert result.exit_code == EXIT_OK
    assert json.loads(result.stdout)[field] == expected


@pytest.mark.parametrize("kind, index", [("primes", 1), ("scale", 0)])
def test_enum_show_rejects_bad_input(kind, index):
    result = invoke("enum", "show", "--kind", kind, "--index", index)
    assert result.exit_code == EXIT_INVALID


#!------------------ family certify ------------------!#


def test_radii_certify(tmp_path):
    report = tmp_path / "continuity.json"
    result = invoke("family", "certify", "--kind", "radii", "--delta", 0.05, "--samples", 64, "--report", report)
    assert result.exit_code == EXIT_OK
    document = read_document(report, ContinuityFile)
    assert document.passed
    assert len(document.report.witnesses) == 64


def test_single_spiral_certifies_vacuously():
    result = invoke("family", "certify", "--kind", "single_spiral", "--samples", 8)
    assert result.exit_code == EXIT_OK


def test_unknown_family_kind():
    result = invoke("family", "certify", "--kind", "circles")
    assert result.exit_code == EXIT_INVALID


def test_continuity_report_carries_the_configuration_hash(tmp_path):
    config = write_config(tmp_path / "config.yaml", {"family": {"kind": "radii"}, "search": {"curve_samples": 128}})
    report = tmp_path / "continuity.json"
    result = invoke("family", "certify", "--config", config, "--samples", 4, "--report", report)
    assert result.exit_code == EXIT_OK
    assert read_document(report, ContinuityFile).config_hash == load_config(config).hash


def test_impossible_delta_fails():
    result = invoke("family", "certify", "--kind", "radii", "--delta", 1e-12, "--samples", 4)
    assert result.exit_code == EXIT_FAILED


#!------------------ build ------------------!#


def test_build_writes_certified_series(built):
    folder, _, result = built
    assert result.exit_code == EXIT_OK, result.output
    series = read_document(folder / "series.json", SeriesFile)
    certificates = read_document(folder / "certs.json", CertificateFile)
    assert series.config_hash == certificates.config_hash
    assert len(series.terms) == 1
    assert certificates.passed
    assert (certificates.certificates[0].k, certificates.certificates[0].n) == (32, 15)


def test_builds_are_reproducible(built, tmp_path):
    folder, config, _ = built
    result = invoke("build", "--config", config, "--out", tmp_path / "series.json", "--report", tmp_path / "certs.json")
    assert result.exit_code == EXIT_OK
    assert (tmp_path / "series.json").read_bytes() == (folder / "series.json").read_bytes()
    assert (tmp_path / "certs.json").read_bytes() == (folder / "certs.json").read_bytes()


def test_series_file_round_trips(built):
    folder, _, _ = built
    text = (folder / "series.json").read_text(encoding="utf-8")
    document = SeriesFile.model_validate_json(text)
    again = SeriesFile.of(document.series(), document.config_hash)
    assert json.dumps(again.model_dump(mode="json"), sort_keys=True, indent=2) + "\n" == text


def test_empty_build(tmp_path):
    config = write_config(tmp_path / "config.yaml", {"tasks": []})
    result = invoke("build", "--config", config, "--out", tmp_path / "s.json", "--report", tmp_path / "c.json")
    assert result.exit_code == EXIT_OK
    assert read_document(tmp_path / "s.json", SeriesFile).terms == []


def test_degree_budget_abort_keeps_partial_output(tmp_path):
    config = write_config(
        tmp_path / "config.yaml",
        {"tasks": [{"j": 1, "p": 1, "l": 1, "s": 2, "t": 8}, {"j": 2, "p": 2, "l": 16, "s": 10**6, "t": 8}]},
    )
    result = invoke(
        "build", "--config", config, "--out", tmp_path / "s.json", "--report", tmp_path / "c.json",
        "--max-degree", 16,
    )
    assert result.exit_code == EXIT_FAILED
    assert len(read_document(tmp_path / "s.json", SeriesFile).terms) == 1


@pytest.mark.parametrize(
    "data",
    [
        {"tasks": [{"p": 1, "l": 1, "s": 2, "t": 8}]},
        {"fit": {"fit_samples": 64, "control_samples": 64}},
        {"family": {"kind": "circles"}},
    ],
)
def test_invalid_configuration(tmp_path, data):
    config = write_config(tmp_path / "config.yaml", data)
    result = invoke("build", "--config", config, "--out", tmp_path / "s.json")
    assert result.exit_code == EXIT_INVALID


def test_missing_configuration(tmp_path):
    result = invoke("build", "--config", tmp_path / "absent.yaml")
    assert result.exit_code == EXIT_INVALID


#!------------------ verify ------------------!#


def test_verify_searches_every_task(built, tmp_path):
    folder, config, _ = built
    report = tmp_path / "verify.json"
    result = invoke("verify", "--series", folder / "series.json", "--config", config, "--report", report)
    assert result.exit_code == EXIT_OK, result.output
    assert read_document(report, CertificateFile).passed


def test_verify_one_index_tuple(built, tmp_path):
    folder, _, _ = built
    report = tmp_path / "verify.json"
    result = invoke(
        "verify", "--series", folder / "series.json", "--indices", "1,2,1,2,8,1,32,15", "--report", report
    )
    assert result.exit_code == EXIT_OK
    certificate = read_document(report, CertificateFile).certificates[0]
    assert str(certificate.indices) == "1,2,1,2,8,1,32,15"


def test_verify_reports_failure(built, tmp_path):
    folder, _, _ = built
    result = invoke(
        "verify", "--series", folder / "series.json", "--indices", "1,7,1,2,8,1,32,15",
        "--report", tmp_path / "verify.json",
    )
    assert result.exit_code == EXIT_FAILED


def test_verify_with_a_task_file(built, tmp_path):
    folder, config, _ = built
    tasks = tmp_path / "tasks.json"
    tasks.write_text(json.dumps({"tasks": [{"j": 2, "p": 1, "l": 1, "s": 2, "t": 8}]}), encoding="utf-8")
    result = invoke(
        "verify", "--series", folder / "series.json", "--task", tasks, "--config", config,
        "--report", tmp_path / "verify.json",
    )
    assert result.exit_code == EXIT_OK


def test_verify_refuses_other_tool_versions(built, tmp_path):
    folder, config, _ = built
    data = json.loads((folder / "series.json").read_text(encoding="utf-8"))
    data["tool_version"] = "0.0.1"
    old = tmp_path / "old.json"
    old.write_text(json.dumps(data), encoding="utf-8")
    refused = invoke("verify", "--series", old, "--config", config, "--report", tmp_path / "v.json")
    assert refused.exit_code == EXIT_INVALID
    allowed = invoke(
        "verify", "--series", old, "--config", config, "--report", tmp_path / "v.json", "--allow-version-mismatch"
    )
    assert allowed.exit_code == EXIT_OK


def test_verify_rejects_other_formats(built, tmp_path):
    folder, _, _ = built
    data = json.loads((folder / "series.json").read_text(encoding="utf-8"))
    data["format_version"] = 99
    other = tmp_path / "other.json"
    other.write_text(json.dumps(data), encoding="utf-8")
    result = invoke("verify", "--series", other, "--report", tmp_path / "v.json", "--allow-version-mismatch")
    assert result.exit_code == EXIT_INVALID


#!------------------ decompose and demo ------------------!#


def test_decompose_constant_one(tmp_path):
    config = write_config(
        tmp_path / "config.yaml",
        {
            "decompose": {
                "f": [[1.0, 0.0]],
                "g_tasks": [{"j": 2, "p": 1, "l": 1, "s": 2, "t": 8}],
                "h_tasks": [{"j": 7, "p": 2, "l": 16, "s": 2, "t": 8}],
            }
        },
    )
    out = tmp_path / "split"
    result = invoke("decompose", "--config", config, "--out", out)
    assert result.exit_code == EXIT_OK, result.output
    g = read_document(out / "g.json", SeriesFile)
    h = read_document(out / "h.json", SeriesFile)
    assert (g.stream, h.stream) == ("g", "h")
    assert len(h.terms) == len(g.terms) + 1
    assert read_document(out / "certificates.json", CertificateFile).passed


def test_decompose_abort_keeps_both_streams(tmp_path):
    config = write_config(
        tmp_path / "config.yaml",
        {
            "fit": {"max_degree": 16},
            "decompose": {
                "f": [[0.0, 0.0]],
                "h_tasks": [{"j": 1, "p": 1, "l": 1, "s": 2, "t": 8}, {"j": 2, "p": 2, "l": 16, "s": 10**6, "t": 8}],
            }
        },
    )
    out = tmp_path / "split"
    result = invoke("decompose", "--config", config, "--out", out)
    assert result.exit_code == EXIT_FAILED
    g = read_document(out / "g.json", SeriesFile)
    h = read_document(out / "h.json", SeriesFile)
    assert g.witnesses == []
    assert [(w.stream, w.task) for w in h.witnesses] == [("h", 0)]
    assert len(h.tasks) == 2
    certificates = read_document(out / "certificates.json", CertificateFile)
    assert [c.stream for c in certificates.certificates] == ["h"]


def test_decompose_needs_a_section(tmp_path):
    config = write_config(tmp_path / "config.yaml", ONE_TASK)
    result = invoke("decompose", "--config", config, "--out", tmp_path / "split")
    assert result.exit_code == EXIT_INVALID


def test_demo_end_to_end(tmp_path):
    result = invoke("--log-level", "INFO", "demo", "--out", tmp_path)
    assert result.exit_code == EXIT_OK, result.output
    certificates = read_document(tmp_path / "certificates.json", CertificateFile)
    assert len(certificates.certificates) == 3
    assert all(c.passed for c in certificates.certificates)
    assert (tmp_path / "decomposition" / "g.json").exists()


def test_output_paths_from_configuration(tmp_path):
    config = write_config(
        tmp_path / "config.yaml",
        {"tasks": [], "outputs": {"out": str(tmp_path / "a.json"), "report": str(tmp_path / "b.json")}},
    )
    result = invoke("build", "--config", config, "--seed", 5)
    assert result.exit_code == EXIT_OK
    assert (tmp_path / "a.json").exists() and (tmp_path / "b.json").exists()


def test_seed_is_not_recorded(tmp_path):
    config = write_config(tmp_path / "config.yaml", {"tasks": []})
    result = invoke("build", "--config", config, "--out", tmp_path / "s.json", "--report", tmp_path / "c.json", "--seed", 7)
    assert result.exit_code == EXIT_OK
    assert "seed" not in (tmp_path / "s.json").read_text(encoding="utf-8")
    assert "seed" not in load_config(config, {"seed": 7}).model_dump()


def test_seed_does_not_change_outputs(tmp_path):
    config = write_config(tmp_path / "config.yaml", {"tasks": []})
    for name, seed in (("one", 1), ("two", 2)):
        invoke("build", "--config", config, "--out", tmp_path / f"{name}.json", "--report", tmp_path / f"{name}-c.json", "--seed", seed)
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()
