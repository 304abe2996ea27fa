import json
import shutil

import numpy as np
import pytest

from ergocodesign import presets
from ergocodesign.errors import ContractError, ParseError
from ergocodesign.evo.genes import design_key
from ergocodesign.model.io import model_from_dict
from ergocodesign.model.model import HardwareParams
from ergocodesign.scenario import LoadSpec, embedded_scenario, load_scenario, parse_scenario, same_skeleton

from conftest import DATA

SCENARIOS = sorted(p.name for p in (DATA / "scenarios").glob("*.json"))


@pytest.fixture
def desk(tmp_path):
    """Writable copy of the desk scenario with its models."""
    shutil.copytree(DATA / "models", tmp_path / "models")
    (tmp_path / "scenarios").mkdir()
    data = json.loads((DATA / "scenarios" / "desk.json").read_text())
    return tmp_path / "scenarios", data


def write(dirpath, data, name="s.json"):
    p = dirpath / name
    p.write_text(json.dumps(data, indent=2))
    return p


@pytest.mark.parametrize("name", SCENARIOS)
def test_shipped_scenarios_parse(name):
    sc = load_scenario(DATA / "scenarios" / name)
    assert sc.humans and sc.loads
    assert all(l.mass > 0 for l in sc.loads)
    assert len(sc.cases()) == len(sc.humans) * len(sc.loads)
    assert all(sc.gene_space.contains(p) for p in sc.warm_start)


def test_desk_settings():
    sc = load_scenario(DATA / "scenarios" / "desk.json")
    assert [h for h, _ in sc.humans] == ["human_170", "human_185"]
    assert [l.mass for l in sc.loads] == [5.0, 10.0]
    assert sc.task.heights == (1.0, 1.3)
    assert sc.evolution.population_size == 8 and sc.evolution.elitism == 1
    assert sc.evolution.tournament_size == 3 and sc.evolution.stop_improvement == 0.05
    assert design_key(sc.warm_start[0]) == design_key(HardwareParams.nominal(sc.robot))
    fixed = [c for c in sc.contacts if c.kind == "environment"]
    assert all(c.mu == 0.7 for c in fixed)


def test_schema_error_reports_field_and_line(desk):
    d, data = desk
    data["loads"][1]["mass"] = -1.0
    p = write(d, data)
    with pytest.raises(ParseError) as err:
        load_scenario(p)
    assert err.value.field == "loads/1/mass"
    text = p.read_text().splitlines()
    assert '"mass"' in text[err.value.line - 1]
    assert str(p) in str(err.value) and "None" not in str(err.value)


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda d: d.pop("heights"), ""),
        (lambda d: d.update(heights=[]), "heights"),
        (lambda d: d.update(extra=1), ""),
        (lambda d: d["contacts"][0].update(kind="weld"), "contacts/0/kind"),
        (lambda d: d["evolution"].update(population_size=0), "evolution/population_size"),
        (lambda d: d.update(schema_version=2), "schema_version"),
    ],
)
def test_schema_violations(desk, mutate, field):
    d, data = desk
    mutate(data)
    with pytest.raises(ParseError) as err:
        load_scenario(write(d, data))
    assert (err.value.field or "") == field


def test_semantic_errors(desk):
    d, data = desk
    bad = dict(data, humans=["../models/nope.json"])
    with pytest.raises(ParseError) as err:
        load_scenario(write(d, bad))
    assert err.value.field == "humans/0"
    bad = dict(data, humans=["../models/toy_robot.json"])
    with pytest.raises(ParseError, match="not a human"):
        load_scenario(write(d, bad))
    bad = json.loads(json.dumps(data))
    bad["contacts"][0]["frame"] = "l_foot"
    with pytest.raises(ParseError, match="l_foot"):
        load_scenario(write(d, bad))
    bad = dict(data, heights=[1.3, 1.0])
    with pytest.raises(ParseError, match="increasing"):
        load_scenario(write(d, bad))
    bad = json.loads(json.dumps(data))
    bad["evolution"]["length_bounds"] = [1.1, 1.4]
    with pytest.raises(ParseError) as err:
        load_scenario(write(d, bad))
    assert err.value.field == "warm_start/0"
    bad = dict(data, reference_postures={"human": {"no_joint": 0.1}})
    with pytest.raises(ParseError, match="no_joint"):
        load_scenario(write(d, bad))


def test_malformed_json_reports_line(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{\n  "name": "x",\n  "heights": [1.0,\n}\n')
    with pytest.raises(ParseError) as err:
        load_scenario(p)
    assert err.value.line == 4


def test_load_spec_contracts():
    with pytest.raises(ContractError):
        LoadSpec("b", 0.0, (1.0, 1.0, 1.0), {"g": (0, 0, 0)})
    with pytest.raises(ContractError):
        LoadSpec("b", 1.0, (1.0, 0.0, 1.0), {"g": (0, 0, 0)})
    m = LoadSpec("b", 5.0, (0.5, 0.5, 0.02), {"g": (0.25, 0, 0)}).model()
    from ergocodesign.model.model import resolve

    assert resolve(m).total_mass == pytest.approx(5.0, rel=1e-12)


def test_embedded_scenario_round_trip():
    sc = load_scenario(DATA / "scenarios" / "desk.json")
    emb = json.loads(json.dumps(embedded_scenario(sc)))
    back = parse_scenario(emb, base="/nonexistent")
    assert back.digest() == sc.digest()
    assert [h for h, _ in back.humans] == [h for h, _ in sc.humans]
    assert back.evolution == sc.evolution and back.solver == sc.solver
    del emb["embedded_models"][emb["humans"][0]]
    with pytest.raises(ParseError, match="embedded"):
        parse_scenario(emb)


def test_skeleton_checks_and_overrides():
    sc = load_scenario(DATA / "scenarios" / "desk.json")
    other = model_from_dict(presets.reference_robot())
    assert same_skeleton(sc.robot, sc.robot) and not same_skeleton(sc.robot, other)
    with pytest.raises(ContractError):
        sc.cases(other)
    one = sc.with_humans(sc.humans[:1]).with_loads(sc.loads[:1]).with_solver(tol=1e-6)
    assert len(one.cases()) == 1 and one.solver.tol == 1e-6
    assert one.with_evolution(seed=7).evolution.seed == 7
    ref = sc.cases()[0].task.reference_postures
    assert np.array_equal(ref["robot"], sc.robot.default_posture())
