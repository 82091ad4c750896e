import json
import shutil
import subprocess

import pytest

from maltsev_kan.cli import run


def cli(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    for argv in (["gen-algebra", "--kind", "semilattice", "--out", d / "semilattice.json"],
                 ["gen-algebra", "--kind", "heyting", "--m", "3", "--out", d / "heyting.json"],
                 ["gen-fixture", "--kind", "nerve", "--m", 4, "--levels", 2, "--out", d / "nerve4.json"],
                 ["gen-fixture", "--kind", "nerve", "--m", 2, "--levels", 3, "--out", d / "nerve2.json"],
                 ["gen-fixture", "--kind", "reduction", "--m", 4, "--to", 2, "--levels", 3,
                  "--out", d / "reduction.json"],
                 ["gen-fixture", "--kind", "multiply", "--m", 2, "--to", 4, "--levels", 2,
                  "--out", d / "doubling.json"]):
        assert run([str(a) for a in argv]) == 0
    return d


def test_detect(capsys, files):
    assert cli(capsys, "detect-maltsev", files / "semilattice.json")[:2] == (3, "none\n")
    code, out, err = cli(capsys, "detect-maltsev", files / "heyting.json", "--stats")
    assert code == 0 and out.startswith("(") and "found=True" in err
    assert cli(capsys, "detect-maltsev", files / "heyting.json", "--max-closure", 20)[0] == 4


def test_fill(capsys, files):
    argv = ["fill-horn", files / "nerve4.json", "--n", 2, "--k", 1, "--face", "0=3", "--face", "2=1"]
    assert cli(capsys, *argv)[:2] == (0, "13\n")
    code, out, _ = cli(capsys, *argv, "--pretty", "--trace")
    assert code == 0 and out.splitlines()[-1] == "(1,3)" and out.startswith("j\tphase\tw")


def test_fill_bad_horn(capsys, files):
    code, _, err = cli(capsys, "fill-horn", files / "nerve2.json", "--n", 3, "--k", 0,
                       "--face", "1=0", "--face", "2=0", "--face", "3=1")
    assert code == 5 and "match" in err


def test_lift(capsys, files):
    code, out, _ = cli(capsys, "lift-horn", files / "reduction.json", "--n", 2, "--k", 1, "--y", 3,
                       "--face", "0=3", "--face", "2=1", "--trace")
    assert code == 0 and out.splitlines()[-1] == "13"
    code, _, err = cli(capsys, "lift-horn", files / "doubling.json", "--n", 1, "--k", 0, "--y", 1, "--face", "1=0")
    assert code == 3 and "no lift" in err


def test_verify(capsys, files, tmp_path):
    code, out, _ = cli(capsys, "verify-fibration", files / "reduction.json", "--max-dim", 3,
                       "--report", tmp_path / "r.json")
    assert code == 0 and "failures=0" in out
    assert json.loads((tmp_path / "r.json").read_text())["failures"] == []
    code, out, err = cli(capsys, "verify-fibration", files / "doubling.json", "--max-dim", 1)
    assert code == 3 and "levelwise_surjective=False" in out and "unliftable: n=1" in err
    assert cli(capsys, "verify-fibration", files / "reduction.json", "--max-dim", 3, "--budget", 10)[0] == 4


def test_report_bytes_stable(capsys, files, tmp_path):
    for name, w in (("a", 1), ("b", 4)):
        cli(capsys, "verify-fibration", files / "reduction.json", "--max-dim", 3, "--no-timing",
            "--workers", w, "--report", tmp_path / f"{name}.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_kan12(capsys):
    assert cli(capsys, "kan12-circle", "--m", 2)[:2] == (0, "7\n")
    assert cli(capsys, "kan12-circle", "--m", 3, "--pretty")[:2] == (0, "(1,1,2)\n")


def test_validate(capsys, files, tmp_path):
    for name in ("nerve2.json", "reduction.json", "semilattice.json"):
        assert cli(capsys, "validate", files / name)[0] == 0
    doc = json.loads((files / "nerve2.json").read_text())
    doc["faces"][1][0][3] ^= 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = cli(capsys, "validate", bad)
    assert code == 5 and "bad.json" in err and "level" in err


def test_usage_errors(capsys, files):
    assert cli(capsys, "detect-maltsev", files / "semilattice.json", "--bogus")[0] == 2
    assert cli(capsys)[0] == 2
    assert cli(capsys, "validate", files / "missing.json")[0] == 2
    assert cli(capsys, "fill-horn", files / "nerve4.json", "--n", 2, "--k", 1, "--face", "0:3")[0] == 2


def test_malformed_file(capsys, tmp_path):
    p = tmp_path / "junk.json"
    p.write_text("{not json")
    code, _, err = cli(capsys, "detect-maltsev", p)
    assert code == 5 and "junk.json" in err


def test_roundtrip_generated_files(files):
    from maltsev_kan.formats import load_simplicial, serialize_simplicial
    text = (files / "nerve2.json").read_text(encoding="utf-8")
    assert serialize_simplicial(load_simplicial(files / "nerve2.json")) == text


@pytest.mark.skipif(shutil.which("maltsev-kan") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["maltsev-kan", "kan12-circle", "--m", "2"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout == "7\n"
