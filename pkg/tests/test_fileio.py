import numpy as np
import pytest

from tensorank import fileio
from tensorank.fileio import FormatError
from tensorank.loglinear import CapExceeded, random_weakly_hierarchical, tensor_from_loglinear
from tensorank.tensors import CTucker, Parafac, eval_ctucker, eval_parafac


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestModelFiles:
    def test_round_trip(self, tmp_path, rng):
        m = random_weakly_hierarchical((2, 3, 4), rng)
        path = str(tmp_path / "m.txt")
        fileio.write_model(path, m)
        back = fileio.read_model(path)
        assert back.scheme == m.scheme and back.theta == m.theta and back.theta0 == m.theta0

    def test_one_based_and_canonical(self, tmp_path):
        path = write(tmp_path, "m.txt", "scheme=3,2\n# comment\nE=2,1; levels=2,3; value=0.5\n")
        m = fileio.read_model(path)
        assert m.theta == {((0, 1), (2, 1)): 0.5}

    @pytest.mark.parametrize(
        "body",
        [
            "E=1; levels=2; value=1\n",  # no scheme
            "scheme=2,2\nE=1; levels=1; value=1\n",  # corner level
            "scheme=2,2\nE=3; levels=2; value=1\n",  # variable out of range
            "scheme=2,2\nE=1,2; levels=2; value=1\n",  # length mismatch
            "scheme=2,2\nE=1; levels=2; value=x\n",  # bad float
            "scheme=2,2\nE=1; levels=2\n",  # missing field
            "scheme=2,2\nE=1,2; levels=2,2; value=1\nE=2,1; levels=2,2; value=2\n",  # duplicate
            "scheme=2,1\n",  # degenerate scheme
            "scheme=2,2\ngarbage\n",
        ],
    )
    def test_malformed(self, tmp_path, body):
        with pytest.raises((FormatError, ValueError)):
            fileio.read_model(write(tmp_path, "m.txt", body))


class TestGraphFiles:
    def test_inline_edges(self):
        assert fileio.parse_edges("1-2, 2-3,") == [(0, 1), (1, 2)]
        with pytest.raises(FormatError):
            fileio.parse_edges("1:2")
        with pytest.raises(FormatError):
            fileio.parse_edges("0-2")

    def test_round_trip(self, tmp_path):
        path = str(tmp_path / "g.txt")
        fileio.write_graph(path, 5, [(0, 1), (3, 2)])
        assert fileio.read_graph(path) == (5, [(0, 1), (3, 2)])

    def test_bad_graph(self, tmp_path):
        with pytest.raises(FormatError):
            fileio.read_graph(write(tmp_path, "g.txt", "1 2 3\n"))
        with pytest.raises(FormatError):
            fileio.read_graph(write(tmp_path, "g.txt", "p=2\n1 3\n"))


class TestTensorFiles:
    def test_round_trip(self, tmp_path, rng):
        pi = tensor_from_loglinear(random_weakly_hierarchical((2, 3), rng))
        path = str(tmp_path / "t.txt")
        fileio.write_tensor(path, pi)
        assert np.array_equal(fileio.read_tensor(path), pi)

    def test_absent_cells_are_zero(self, tmp_path):
        pi = fileio.read_tensor(write(tmp_path, "t.txt", "scheme=2,2\ncell=1,1; p=0.5\ncell=2,2; p=0.5\n"))
        assert np.array_equal(pi, [[0.5, 0], [0, 0.5]])

    @pytest.mark.parametrize(
        "body",
        [
            "cell=1,1; p=1\n",
            "scheme=2,2\ncell=3,1; p=1\n",
            "scheme=2,2\ncell=1,1; p=0.5\ncell=1,1; p=0.5\n",
            "scheme=2,2\ncell=1,1; q=1\n",
        ],
    )
    def test_malformed(self, tmp_path, body):
        with pytest.raises(FormatError):
            fileio.read_tensor(write(tmp_path, "t.txt", body))

    def test_cap(self, tmp_path):
        with pytest.raises(CapExceeded):
            fileio.read_tensor(write(tmp_path, "t.txt", "scheme=" + ",".join(["2"] * 25) + "\n"))


class TestExpansionFiles:
    def test_parafac(self, tmp_path, rng):
        exp = Parafac(rng.dirichlet(np.ones(3)), (rng.dirichlet(np.ones(2), 3), rng.dirichlet(np.ones(4), 3)))
        path = str(tmp_path / "e.txt")
        fileio.write_expansion(path, exp)
        assert np.array_equal(eval_parafac(fileio.read_expansion(path)), eval_parafac(exp))

    def test_ctucker(self, tmp_path, rng):
        # arms of group g carry core.shape[g] rows
        core = rng.dirichlet(np.ones(6)).reshape(2, 3)
        arms = (rng.dirichlet(np.ones(2), 3), rng.dirichlet(np.ones(2), 2), rng.dirichlet(np.ones(2), 3))
        exp = CTucker((1, 0, 1), core, arms)
        path = str(tmp_path / "e.txt")
        fileio.write_expansion(path, exp)
        back = fileio.read_expansion(path)
        assert back.groups == exp.groups
        assert np.array_equal(eval_ctucker(back), eval_ctucker(exp))

    def test_malformed(self, tmp_path):
        with pytest.raises(FormatError):
            fileio.read_expansion(write(tmp_path, "e.txt", "kind=parafac\n[arm 1]\n1.0\n"))
        with pytest.raises(FormatError):
            fileio.read_expansion(write(tmp_path, "e.txt", "kind=other\n[arm 1]\n1.0\n"))


class TestDataFiles:
    def test_round_trip(self, tmp_path, rng):
        obs = rng.integers(0, 3, size=(20, 4))
        path = str(tmp_path / "d.csv")
        fileio.write_data(path, obs)
        data, names, scheme = fileio.read_data(path, (3, 3, 3, 3))
        assert np.array_equal(data, obs) and names == ["y1", "y2", "y3", "y4"] and scheme == (3,) * 4

    def test_cell_counts_expand(self, tmp_path):
        counts = np.array([[2, 0], [1, 3]])
        path = str(tmp_path / "c.csv")
        fileio.write_cell_counts(path, counts)
        data, names, scheme = fileio.read_data(path)
        assert data.shape == (6, 2) and scheme == (2, 2)
        assert np.array_equal(np.bincount(data[:, 0] * 2 + data[:, 1], minlength=4).reshape(2, 2), counts)

    def test_scheme_inferred(self, tmp_path):
        data, _, scheme = fileio.read_data(write(tmp_path, "d.csv", "a,b\n1,3\n1,1\n"))
        assert scheme == (2, 3)

    @pytest.mark.parametrize(
        "body",
        ["", "a,b\n0,1\n", "a,b\n1\n", "a,b\nx,1\n", "a,count\n1,-1\n", "a,b\n"],
    )
    def test_malformed(self, tmp_path, body):
        with pytest.raises(FormatError):
            fileio.read_data(write(tmp_path, "d.csv", body))

    def test_level_beyond_scheme(self, tmp_path):
        with pytest.raises(FormatError):
            fileio.read_data(write(tmp_path, "d.csv", "a,b\n3,1\n"), (2, 2))
