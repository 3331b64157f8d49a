import json
import socket

import pytest
import yaml

from conftest import DATA, FIXTURES, TEMPLATES, data_text
from nl2pddl.cli import main
from nl2pddl.pipeline import ConfigError, PipelineConfig, run

LOGISTICS = DATA / "logistics"
BW = DATA / "blocksworld"


def logistics_config(tmp_path, **overrides):
    cfg = yaml.safe_load((LOGISTICS / "pipeline.yaml").read_text())
    cfg["fixtures"] = str(FIXTURES)
    cfg["paths"] = {k: str(LOGISTICS / v) for k, v in cfg["paths"].items()}
    cfg["paths"]["templates"] = str(TEMPLATES)
    cfg.update(overrides)
    path = tmp_path / "pipeline.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


@pytest.fixture
def no_network(monkeypatch):
    def refuse(*args, **kwargs):
        raise AssertionError("network access attempted")

    monkeypatch.setattr(socket.socket, "connect", refuse)
    monkeypatch.setattr(socket, "create_connection", refuse)


def test_full_logistics_run(tmp_path, no_network):
    out = tmp_path / "out"
    report = run(PipelineConfig.load(logistics_config(tmp_path), out=out))
    assert report.exit_code == 0
    assert [s.status for s in report.stages] == ["ok"] * 5
    assert report.stages[0].details["predicates"] == 7
    assert (out / "domain.pddl").read_text() == data_text("logistics/domain.pddl")
    assert json.loads((out / "diagnostics.json").read_text()) == []
    assert report.stages[3].details["validation"]["status"] == "valid"
    assert report.stages[4].details == {"rounds": 1, "verdict": "accept"}
    assert set(report.artifacts) == {"domain.pddl", "problem.pddl", "diagnostics.json", "plan.txt",
                                     "feedback.json", "problem_revised.pddl"}
    ledger = [json.loads(l) for l in (out / "ledger.jsonl").read_text().splitlines()]
    assert len(ledger) == 14 and all(r["backend"].startswith("fixture:") for r in ledger)


def test_validate_only(tmp_path):
    report = run(PipelineConfig.load(logistics_config(tmp_path, stages=["validate"]), out=tmp_path / "o"))
    assert report.exit_code == 0 and report.stages[0].diagnostics == []


def test_faulty_domain_halts_before_plan(tmp_path):
    bad = tmp_path / "bad.pddl"
    bad.write_text(data_text("logistics/domain.pddl").replace("(truck-at ?t ?l1)", "(truck-at ?t)", 1))
    path = logistics_config(tmp_path, stages=["validate", "plan"])
    cfg = yaml.safe_load(path.read_text())
    cfg["paths"]["domain"] = str(bad)
    path.write_text(yaml.safe_dump(cfg))
    report = run(PipelineConfig.load(path, out=tmp_path / "o"))
    assert [s.status for s in report.stages] == ["failed", "skipped"]
    assert report.exit_code == 1
    assert report.stages[0].diagnostics[0]["code"] == "ArityMismatch"
    kept = run(PipelineConfig.load(path, out=tmp_path / "k"), keep_going=True)
    assert kept.stages[1].status != "skipped"


def test_paths_resolve_against_config_file():
    cfg = PipelineConfig.load(LOGISTICS / "pipeline.yaml")
    assert cfg.paths["domain"] == LOGISTICS / "domain.pddl"
    assert cfg.fixtures == LOGISTICS / "../fixtures"


@pytest.mark.parametrize("change, message", [
    ({"stages": ["plan", "validate"]}, "ordered"),
    ({"stages": ["solve"]}, "unknown stage"),
    ({"surprise": 1}, "unknown config keys"),
    ({"backend": "cloud"}, "backend"),
    ({"feedback_mode": "hybrid"}, "answers"),
    ({"llm": {"temperature": 5}}, "temperature"),
    ({"llm": {"api_key_env": "${NO_SUCH_VAR_X}"}}, "NO_SUCH_VAR_X"),
])
def test_config_errors(tmp_path, change, message):
    with pytest.raises(ConfigError, match=message):
        PipelineConfig.load(logistics_config(tmp_path, **change), env={})


def test_env_interpolated_in_llm_section(tmp_path):
    cfg = PipelineConfig.load(logistics_config(tmp_path, llm={"model": "${MODEL}"}), env={"MODEL": "m1"})
    assert cfg.llm.model == "m1"


def test_missing_input_path(tmp_path):
    path = logistics_config(tmp_path)
    cfg = yaml.safe_load(path.read_text())
    cfg["paths"]["domain_desc"] = str(tmp_path / "absent.txt")
    path.write_text(yaml.safe_dump(cfg))
    with pytest.raises(ConfigError, match="does not exist"):
        PipelineConfig.load(path)


def test_hybrid_feedback_with_answers(tmp_path):
    answers = tmp_path / "answers.txt"
    answers.write_text("")
    path = logistics_config(tmp_path, stages=["feedback"], feedback_mode="hybrid")
    cfg = yaml.safe_load(path.read_text())
    cfg["paths"]["answers"] = str(answers)
    path.write_text(yaml.safe_dump(cfg))
    report = run(PipelineConfig.load(path, out=tmp_path / "o"))
    assert report.ok


# command line

def test_cli_run(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", "--config", str(logistics_config(tmp_path)), "--out", str(out), "--seed", "3"])
    assert code == 0
    assert "build-domain: ok" in capsys.readouterr().out
    assert json.loads((out / "run_report.json").read_text())["seed"] == 3


def test_cli_single_stage(tmp_path):
    out = tmp_path / "out"
    assert main(["build-domain", "--config", str(logistics_config(tmp_path)), "--out", str(out)]) == 0
    assert (out / "domain.pddl").exists() and not (out / "problem.pddl").exists()


def test_cli_config_errors_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == 2
    assert main(["run", "--config", str(logistics_config(tmp_path, stages=["solve"]))]) == 2


def test_cli_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["plan"])
    assert exc.value.code == 2


def test_cli_parse(capsys):
    assert main(["parse", str(BW / "pickup_domain.pddl")]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["kind"] == "domain" and summary["actions"] == ["pickup"]
    assert main(["parse", str(BW / "colored_blocks_problem.pddl")]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "problem"


def test_cli_fmt(tmp_path, capsys):
    assert main(["fmt", "--check", str(LOGISTICS / "domain.pddl")]) == 0
    messy = tmp_path / "p.pddl"
    messy.write_text("(define (problem p) (:domain d) (:objects a) (:init (q a)) (:goal (q a)))")
    assert main(["fmt", "--check", str(messy)]) == 1
    assert main(["fmt", "-i", str(messy)]) == 0
    assert main(["fmt", "--check", str(messy)]) == 0


def test_cli_check(capsys):
    assert main(["check", str(BW / "domain.pddl"), str(BW / "problem.pddl")]) == 0
    assert main(["check", str(BW / "pickup_domain.pddl")]) == 0
    assert "UnusedPredicate" in capsys.readouterr().out
    assert main(["check", "--strict", "--json", str(BW / "pickup_domain.pddl")]) == 1
    assert json.loads(capsys.readouterr().out)[0]["severity"] == "error"


def test_cli_plan_and_validate(tmp_path, capsys):
    plan = tmp_path / "plan.txt"
    assert main(["plan", str(BW / "domain.pddl"), str(BW / "problem.pddl"), "-o", str(plan)]) == 0
    assert main(["validate-plan", str(BW / "domain.pddl"), str(BW / "problem.pddl"), str(plan)]) == 0
    capsys.readouterr()
    plan.write_text("(stack a b)\n")
    assert main(["validate-plan", str(BW / "domain.pddl"), str(BW / "problem.pddl"), str(plan)]) == 1
    assert json.loads(capsys.readouterr().out)["status"] == "invalid"


def test_cli_plan_unsolvable(tmp_path):
    prob = tmp_path / "p.pddl"
    prob.write_text("(define (problem p) (:domain blocksworld) (:objects a) (:init (arm-empty) (clear a) "
                    "(on-table a)) (:goal (on a a)))")
    assert main(["plan", str(BW / "domain.pddl"), str(prob)]) == 1


def test_cli_compare(tmp_path, capsys):
    d = str(BW / "domain.pddl")
    assert main(["compare", d, d, str(BW / "problem.pddl"), "--walks", "20"]) == 0
    mutant = tmp_path / "mutant.pddl"
    mutant.write_text(data_text("blocksworld/domain.pddl").replace("(clear ?ob) (on-table ?ob)", "(on-table ?ob)", 1))
    assert mutant.read_text() != data_text("blocksworld/domain.pddl")
    capsys.readouterr()
    assert main(["compare", d, str(mutant), str(BW / "problem.pddl"), "--walks", "200"]) == 1
    assert json.loads(capsys.readouterr().out)["result"] == "Disagree"


def test_cli_bad_pddl_exit_1(tmp_path):
    broken = tmp_path / "x.pddl"
    broken.write_text("(define (domain d)")
    assert main(["parse", str(broken)]) == 1
    assert main(["parse", str(tmp_path / "none.pddl")]) == 2
