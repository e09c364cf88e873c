import numpy as np
import pytest
from typer.testing import CliRunner

from pedkin.cli import app
from pedkin.config.run_config import CONFIG_ENV_VAR
from pedkin.pedigree.io import read_kinship_matrix, write_pedigree
from tests.conftest import FIRST_COUSINS, TRIO, last_generation

runner = CliRunner()


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
    monkeypatch.delenv("PEDKIN_THREADS", raising=False)


def _read_matrix(path):
    with open(path, encoding="utf-8") as f:
        return read_kinship_matrix(f)


def _data_lines(path):
    with open(path, encoding="utf-8") as f:
        return [line for line in f.read().splitlines() if line and not line.startswith("#")]


class TestExact:
    def test_dense(self, write_file):
        ped = write_file("trio.ped", TRIO)
        result = runner.invoke(app, ["exact", ped, "-o", "out.txt"])
        assert result.exit_code == 0, result.output
        matrix = _read_matrix("out.txt")
        assert matrix.ids == ("A", "B", "C")
        assert matrix.get("A", "C") == 0.25
        assert matrix.get("C", "C") == 0.0

    def test_triplet(self, write_file):
        ped = write_file("trio.ped", TRIO)
        result = runner.invoke(app, ["exact", ped, "--format", "triplet", "-o", "out.txt"])
        assert result.exit_code == 0, result.output
        assert len(_data_lines("out.txt")) == 2

    def test_self_kinship_diagonal(self, write_file):
        ped = write_file("trio.ped", TRIO)
        result = runner.invoke(app, ["exact", ped, "--diagonal", "self-kinship", "-o", "out.txt"])
        assert result.exit_code == 0, result.output
        matrix = _read_matrix("out.txt")
        assert matrix.convention.value == "self-kinship"
        assert np.diag(matrix.values).tolist() == [0.5, 0.5, 0.5]

    def test_interest_subset(self, write_file):
        ped = write_file("cousins.ped", FIRST_COUSINS)
        interest = write_file("interest.txt", "C1\nC2\n")
        result = runner.invoke(app, ["exact", ped, "--interest", interest, "-o", "out.txt"])
        assert result.exit_code == 0, result.output
        matrix = _read_matrix("out.txt")
        assert matrix.ids == ("C1", "C2")
        assert matrix.get("C1", "C2") == 0.0625

    @pytest.mark.parametrize("flag", ["--founder-kinship", "--psi"])
    def test_founder_kinship_file(self, write_file, flag):
        ped = write_file("trio.ped", TRIO)
        psi = write_file("psi.txt", "A B 0.5\n")
        result = runner.invoke(app, ["exact", ped, flag, psi, "-o", "out.txt"])
        assert result.exit_code == 0, result.output
        assert _read_matrix("out.txt").get("C", "C") == 0.5

    def test_threads_option_leaves_output_unchanged(self, write_file):
        ped = write_file("cousins.ped", FIRST_COUSINS)
        assert runner.invoke(app, ["exact", ped, "-o", "one.txt"]).exit_code == 0
        result = runner.invoke(app, ["exact", ped, "--threads", "2", "-o", "two.txt"])
        assert result.exit_code == 0, result.output
        with open("one.txt") as a, open("two.txt") as b:
            assert a.read() == b.read()

    def test_bad_format_is_usage_error(self, write_file):
        ped = write_file("trio.ped", TRIO)
        result = runner.invoke(app, ["exact", ped, "--format", "xml"])
        assert result.exit_code == 2

    def test_missing_file(self):
        result = runner.invoke(app, ["exact", "nowhere.ped"])
        assert result.exit_code == 1

    def test_malformed_pedigree(self, write_file):
        ped = write_file("bad.ped", "A 0 0\n")
        result = runner.invoke(app, ["exact", ped])
        assert result.exit_code == 1


class TestCut:
    @pytest.fixture
    def wf_files(self, wright_fisher, write_file, tmp_path):
        ped = wright_fisher(N=6, G=5)
        path = tmp_path / "wf.ped"
        with open(path, "w", encoding="utf-8") as f:
            write_pedigree(ped, f)
        interest = write_file("last.txt", "\n".join(last_generation(ped, 6)) + "\n")
        return str(path), interest

    def test_greedy_cut_matches_exact(self, wf_files):
        ped, interest = wf_files
        assert runner.invoke(app, ["cut", ped, "--interest", interest, "--max-segment", "30", "-o", "cut.txt"]).exit_code == 0
        assert runner.invoke(app, ["exact", ped, "--interest", interest, "-o", "exact.txt"]).exit_code == 0
        cut, exact = _read_matrix("cut.txt"), _read_matrix("exact.txt")
        assert cut.ids == exact.ids
        assert np.abs(cut.values - exact.values).max() <= 1e-12

    def test_manual_cut_with_plan(self, wf_files):
        ped, interest = wf_files
        result = runner.invoke(app, ["cut", ped, "--interest", interest, "--cut-at", "2,3", "--emit-plan", "-o", "cut.txt"])
        assert result.exit_code == 0, result.output
        assert "segments=3" in result.output

    def test_bad_cut_list(self, wf_files):
        ped, interest = wf_files
        assert runner.invoke(app, ["cut", ped, "--interest", interest, "--cut-at", "2,x"]).exit_code == 2
        assert runner.invoke(app, ["cut", ped, "--interest", interest, "--cut-at", "9"]).exit_code == 1

    def test_threads_and_founder_kinship(self, wf_files, tmp_path):
        ped, interest = wf_files
        psi = tmp_path / "psi.txt"
        psi.write_text("g0_0 g0_1 0.25\n", encoding="utf-8")
        base = ["cut", ped, "--interest", interest, "--cut-at", "2,3", "--founder-kinship", str(psi)]
        assert runner.invoke(app, base + ["-o", "one.txt"]).exit_code == 0
        result = runner.invoke(app, base + ["--threads", "2", "-o", "two.txt"])
        assert result.exit_code == 0, result.output
        with open("one.txt") as a, open("two.txt") as b:
            assert a.read() == b.read()

    def test_falls_back_to_exact(self, write_file):
        ped = write_file("trio.ped", TRIO)
        interest = write_file("interest.txt", "A\nC\n")
        result = runner.invoke(app, ["cut", ped, "--interest", interest, "--max-segment", "1", "-o", "out.txt"])
        assert result.exit_code == 0, result.output
        assert _read_matrix("out.txt").get("A", "C") == 0.25


class TestSample:
    def test_deterministic_for_seed_and_threads(self, write_file):
        ped = write_file("cousins.ped", FIRST_COUSINS)
        args = ["sample", ped, "-S", "8300", "--seed", "5"]
        assert runner.invoke(app, args + ["-o", "one.txt"]).exit_code == 0
        assert runner.invoke(app, args + ["-o", "two.txt"], env={"PEDKIN_THREADS": "3"}).exit_code == 0
        with open("one.txt") as a, open("two.txt") as b:
            assert a.read() == b.read()

    def test_prints_generated_seed(self, write_file):
        ped = write_file("trio.ped", TRIO)
        result = runner.invoke(app, ["sample", ped, "-S", "10", "-o", "out.txt"])
        assert result.exit_code == 0, result.output
        assert "seed=" in result.output

    def test_standard_errors_block(self, write_file):
        ped = write_file("trio.ped", TRIO)
        result = runner.invoke(app, ["sample", ped, "-S", "100", "--seed", "1", "--stderr", "-o", "out.txt"])
        assert result.exit_code == 0, result.output
        with open("out.txt", encoding="utf-8") as f:
            text = f.read()
        assert "# standard-errors" in text
        # 父子亲缘在每次重复中都恰好为 1/4
        assert _read_matrix("out.txt").get("A", "C") == 0.25

    def test_invalid_sample_count(self, write_file):
        ped = write_file("trio.ped", TRIO)
        assert runner.invoke(app, ["sample", ped, "-S", "0", "--seed", "1"]).exit_code == 1


class TestTools:
    def test_simulate_wright_fisher(self):
        result = runner.invoke(app, ["simulate", "-N", "2", "-G", "3", "--seed", "1", "-o", "wf.ped"])
        assert result.exit_code == 0, result.output
        assert len(_data_lines("wf.ped")) == 12

    def test_simulate_random_prints_seed(self):
        result = runner.invoke(app, ["simulate", "--model", "random", "-n", "8", "--founders", "0.5", "-o", "r.ped"])
        assert result.exit_code == 0, result.output
        assert "seed=" in result.output
        assert len(_data_lines("r.ped")) == 8

    def test_simulate_unknown_model(self):
        assert runner.invoke(app, ["simulate", "--model", "coalescent"]).exit_code == 2

    def test_ancestors(self, write_file):
        ped = write_file("cousins.ped", FIRST_COUSINS)
        result = runner.invoke(app, ["ancestors", ped, "C1", "-o", "anc.txt"])
        assert result.exit_code == 0, result.output
        assert _data_lines("anc.txt") == ["GF", "GM", "P1", "W1", "C1"]

    def test_ancestors_unknown_individual(self, write_file):
        ped = write_file("trio.ped", TRIO)
        assert runner.invoke(app, ["ancestors", ped, "Z"]).exit_code == 1

    def test_ancestors_missing_file(self):
        result = runner.invoke(app, ["ancestors", "nowhere.ped", "C1"])
        assert result.exit_code == 1
        assert "nowhere.ped" in result.output

    def test_states(self):
        result = runner.invoke(app, ["states", "-o", "states.tsv"])
        assert result.exit_code == 0, result.output
        lines = _data_lines("states.tsv")
        assert len(lines) == 16
        header = lines[0].split("\t")
        groups = {line.split("\t")[header.index("condensed")] for line in lines[1:]}
        assert len(groups) == 9

    def test_verify_exact(self, write_file):
        ped = write_file("cousins.ped", FIRST_COUSINS)
        result = runner.invoke(app, ["verify", ped])
        assert result.exit_code == 0, result.output

    def test_verify_matrix_file(self, write_file):
        ped = write_file("trio.ped", TRIO)
        good = write_file("good.txt", "# format=triplet\nA\tC\t0.25\nB\tC\t0.25\n")
        bad = write_file("bad.txt", "# format=triplet\nA\tC\t0.3\nB\tC\t0.25\n")
        assert runner.invoke(app, ["verify", ped, "--matrix", good]).exit_code == 0
        assert runner.invoke(app, ["verify", ped, "--matrix", bad]).exit_code == 1

    def test_bench(self):
        args = ["bench", "-N", "2", "-G", "2", "--steps", "2", "--repeats", "1", "-S", "10", "--seed", "1", "-o", "b.tsv"]
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
        with open("b.tsv", encoding="utf-8") as f:
            lines = f.read().splitlines()
        assert lines[0].split("\t") == ["algo", "N", "G", "n", "work", "seconds"]
        assert len([line for line in lines if line.startswith("# fit")]) == 3
        assert len(lines) == 1 + 6 + 3

    def test_bench_unknown_algo(self):
        assert runner.invoke(app, ["bench", "--algos", "magic", "--seed", "1"]).exit_code == 1


class TestConfig:
    def test_config_init(self):
        assert runner.invoke(app, ["config-init"]).exit_code == 0
        assert runner.invoke(app, ["config-init"]).exit_code == 1
        assert runner.invoke(app, ["config-init", "--force"]).exit_code == 0

    def test_config_defaults_apply(self, write_file):
        write_file("pedkin.yaml", "defaults:\n  format: triplet\n")
        ped = write_file("trio.ped", TRIO)
        result = runner.invoke(app, ["exact", ped, "-o", "out.txt"])
        assert result.exit_code == 0, result.output
        assert len(_data_lines("out.txt")) == 2

    def test_invalid_config_file(self, write_file):
        write_file("pedkin.yaml", "defaults:\n  threads: 0\n")
        ped = write_file("trio.ped", TRIO)
        assert runner.invoke(app, ["exact", ped]).exit_code == 1

    def test_config_option(self, write_file):
        path = write_file("custom.yaml", "defaults:\n  diagonal: self-kinship\n")
        ped = write_file("trio.ped", TRIO)
        result = runner.invoke(app, ["--config", path, "exact", ped, "-o", "out.txt"])
        assert result.exit_code == 0, result.output
        assert _read_matrix("out.txt").get("A", "A") == 0.5
