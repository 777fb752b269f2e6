import hashlib
import json

from app.clients.storage import MANIFEST_NAME, ArtifactWriter, canonical_json, config_hash
from app.core.settings import RunConfig
from app.schemas.stats import ChiSquareResult


def test_canonical_json_sorts_keys():
    assert canonical_json({"b": 1, "a": [1.5, None]}) == '{\n  "a": [\n    1.5,\n    null\n  ],\n  "b": 1\n}\n'


def test_canonical_json_dumps_models():
    result = ChiSquareResult(statistic=1.0, dof=1, p_value=0.3173)
    assert json.loads(canonical_json(result)) == result.model_dump(mode="json")
    assert json.loads(canonical_json([result])) == [result.model_dump(mode="json")]


def test_writer_records_hashes(tmp_path):
    writer = ArtifactWriter(tmp_path)
    path = writer.write_json("nested/data.json", {"x": 1})

    assert path == tmp_path / "nested" / "data.json"
    assert writer.hashes["nested/data.json"] == hashlib.sha256(path.read_bytes()).hexdigest()


def test_write_csv_cells(tmp_path):
    writer = ArtifactWriter(tmp_path)
    writer.write_csv("rows.csv", [{"a": 0.1, "b": True, "c": None}, {"a": 2, "b": False, "c": "x"}], ["a", "b", "c"])
    assert (tmp_path / "rows.csv").read_text() == "a,b,c\n0.1,true,\n2,false,x\n"

    writer.write_csv("empty.csv", [], ["a"])
    assert (tmp_path / "empty.csv").read_text() == "a\n"


def test_manifest(tmp_path):
    writer = ArtifactWriter(tmp_path)
    writer.write_text("b.txt", "b")
    writer.write_text("a.txt", "a")
    writer.write_manifest(RunConfig(), "ingest")

    manifest = json.loads((tmp_path / MANIFEST_NAME).read_text())
    assert list(manifest["artifacts"]) == ["a.txt", "b.txt"]
    assert manifest["command"] == "ingest"
    assert manifest["config_sha256"] == config_hash(RunConfig(), {"out_dir", "log_level"})


def test_config_hash_ignores_output_location():
    first = RunConfig(out_dir="one", log_level="DEBUG")
    second = RunConfig(out_dir="two")
    exclude = {"out_dir", "log_level"}

    assert config_hash(first, exclude) == config_hash(second, exclude)
    assert config_hash(first) != config_hash(second)
    assert config_hash(RunConfig(seed=1), exclude) != config_hash(RunConfig(seed=2), exclude)
