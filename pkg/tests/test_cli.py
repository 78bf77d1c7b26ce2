"""Command-line interface, exercised in-process through main()."""

import json

import numpy as np
import pytest

from tracelift.cli import main, save_matrix
from tracelift.instances import random_pd


@pytest.fixture
def diag_files(tmp_path):
    # commuting pair: G_t = diag(2^{1-t} 8^t, 3) so tr G_{1/2} = 4 + 3
    A = np.diag([2.0, 3.0])
    B = np.diag([8.0, 3.0])
    pa, pb = tmp_path / "A.json", tmp_path / "B.json"
    save_matrix(A, pa)
    save_matrix(B, pb)
    return str(pa), str(pb)


class TestEmit:
    def test_census_line(self, tmp_path, capsys):
        out = tmp_path / "m.dat-s"
        rc = main(["emit", "--function", "geomean", "--t", "8/13", "--n", "2",
                   "--out", str(out)])
        assert rc == 0
        assert "4 x (size 4), 1 x (size 2)" in capsys.readouterr().out
        assert out.exists()

    def test_negative_exponent_parses(self, tmp_path):
        out = tmp_path / "m.dat-s"
        rc = main(["emit", "--function", "geomean", "--t", "-1/2", "--n", "2",
                   "--out", str(out)])
        assert rc == 0

    def test_out_of_range_exit_2(self, tmp_path):
        rc = main(["emit", "--function", "geomean", "--t", "7/3", "--n", "2",
                   "--out", str(tmp_path / "m.dat-s")])
        assert rc == 2

    def test_missing_file_exit_3(self, tmp_path):
        rc = main(["emit", "--function", "geomean", "--t", "1/2",
                   "--A", str(tmp_path / "nope.json"),
                   "--B", str(tmp_path / "nope.json"),
                   "--out", str(tmp_path / "m.dat-s")])
        assert rc == 3


class TestEval:
    def test_commuting_pair(self, diag_files, capsys):
        pa, pb = diag_files
        rc = main(["eval", "--function", "geomean", "--t", "1/2",
                   "--A", pa, "--B", pb])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "7"

    def test_missing_t_exit_2(self, diag_files):
        pa, pb = diag_files
        rc = main(["eval", "--function", "geomean", "--A", pa, "--B", pb])
        assert rc == 2

    def test_fidelity_no_t(self, diag_files, capsys):
        pa, pb = diag_files
        rc = main(["eval", "--function", "fidelity", "--A", pa, "--B", pb])
        assert rc == 0
        want = 2.0 * 2.0 + 3.0  # sqrt(A^{1/2} B A^{1/2}) of commuting diag
        assert abs(float(capsys.readouterr().out) - want) < 1e-9


class TestVerify:
    def test_geomean_table(self, capsys):
        rc = main(["verify", "--function", "geomean", "--t", "5/8", "--n", "2",
                   "--trials", "2", "--seed", "3"])
        out = capsys.readouterr().out
        assert rc == 0
        assert out.count("PASS") >= 2

    def test_fidelity(self, capsys):
        rc = main(["verify", "--function", "fidelity", "--n", "2",
                   "--complex", "--trials", "2", "--seed", "3"])
        assert rc == 0
        assert "PASS" in capsys.readouterr().out


class TestCount:
    def test_small_qmax(self, capsys):
        rc = main(["count", "--qmax", "6"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "within bounds" in out


class TestMatrixIo:
    def test_round_trip(self, tmp_path, rng):
        M = random_pd(3, rng, complex_=True)
        path = tmp_path / "m.json"
        save_matrix(M, path)
        data = json.loads(path.read_text())
        assert len(data["re"]) == 3
        from tracelift.cli import load_matrix

        back = load_matrix(path)
        assert np.abs(back - M).max() < 1e-15
