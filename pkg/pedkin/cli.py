import logging
from typing import List, NoReturn, Optional

import click
import numpy as np
import typer
from rich.console import Console
from rich.logging import RichHandler

from .bench.harness import BenchmarkHarness
from .bench.runners import create_runner
from .config.run_config import RunConfig, RunConfigManager, Settings
from .errors import ConfigError, InterestPlacementError, PedkinError
from .kinship.ancestors import compute_ancestor_sets
from .kinship.exact import exact_kinship
from .kinship.identity_states import state_table
from .kinship.matrix import DiagonalConvention, FounderKinship, KinshipMatrix, PsiMode
from .kinship.oracle import brute_force_kinship, compare_matrices
from .kinship.recursive_cut import plan_cuts, plan_from_boundaries, recursive_cut_kinship
from .kinship.sampler import MergeRule, SamplerConfig, estimate_kinship
from .pedigree.io import (
    MATRIX_FORMATS,
    parse_pedigree,
    read_founder_kinship,
    read_interest,
    read_kinship_matrix,
    write_kinship_matrix,
    write_pedigree,
    write_standard_errors,
)
from .pedigree.model import Pedigree
from .simulate.generators import WrightFisherParams, random_pedigree, wright_fisher_pedigree
from .ui.display import UIConfig, ui

app = typer.Typer(help="pedkin: 系谱亲缘系数计算工具", no_args_is_help=True)

logger = logging.getLogger(__name__)

OUTPUT_HELP = "输出文件，'-' 表示标准输出"
THREADS_ENV = "PEDKIN_THREADS"


def _settings(ctx: typer.Context) -> Settings:
    return ctx.obj["settings"] if ctx.obj else Settings()


def _read_pedigree(path: str) -> Pedigree:
    with click.open_file(path, encoding="utf-8") as f:
        return parse_pedigree(f)


def _read_psi(pedigree: Pedigree, psi_path: Optional[str], average_psi: bool) -> Optional[FounderKinship]:
    """读取奠基者亲缘矩阵；--average-psi 时改用平均近交系数模式"""
    if psi_path is None and not average_psi:
        return None
    if psi_path is None:
        psi = FounderKinship.zero(pedigree.founder_ids())
    else:
        with click.open_file(psi_path, encoding="utf-8") as f:
            psi = read_founder_kinship(f, pedigree)
    if average_psi:
        psi = FounderKinship.average_of(psi)
        logger.info(f"average-ψ 模式: psi_bar={psi.psi_bar:.6g}")
    return psi


def _read_interest(path: Optional[str], pedigree: Pedigree) -> Optional[tuple]:
    if path is None:
        return None
    with click.open_file(path, encoding="utf-8") as f:
        interest = read_interest(f, pedigree)
    if not interest:
        raise ConfigError(f"目标个体文件 {path} 为空")
    return interest


def _psi_mode(psi_path: Optional[str], average_psi: bool) -> PsiMode:
    if average_psi:
        return PsiMode.AVERAGE_PSI
    return PsiMode.FULL if psi_path else PsiMode.ZERO


def _check_format(fmt: Optional[str], settings: Settings) -> str:
    fmt = fmt or settings.format
    if fmt not in MATRIX_FORMATS:
        raise typer.BadParameter(f"必须是 {' / '.join(MATRIX_FORMATS)} 之一", param_hint="--format")
    return fmt


def _emit_matrix(matrix: KinshipMatrix, fmt: str, output: str, stderr: Optional[np.ndarray] = None) -> None:
    with click.open_file(output, mode="w", encoding="utf-8") as sink:
        write_kinship_matrix(matrix, fmt, sink)
        if stderr is not None:
            write_standard_errors(matrix.ids, stderr, fmt, sink)


def _fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy % (2**63))


def _fail(error: Exception) -> NoReturn:
    ui.print_error(str(error))
    raise typer.Exit(code=1)


@app.command(name="exact")
def exact(
    ctx: typer.Context,
    pedigree_path: str = typer.Argument(..., help="PED 系谱文件"),
    psi_path: Optional[str] = typer.Option(None, "--founder-kinship", "--psi", help="奠基者亲缘三元组文件"),
    average_psi: bool = typer.Option(False, "--average-psi", help="以平均近交系数初始化奠基者亲缘"),
    interest_path: Optional[str] = typer.Option(None, "--interest", help="只输出这些个体（每行一个 ID）"),
    diagonal: Optional[DiagonalConvention] = typer.Option(None, "--diagonal", help="对角线约定"),
    fmt: Optional[str] = typer.Option(None, "--format", "-f", help="dense 或 triplet"),
    output: str = typer.Option("-", "--output", "-o", help=OUTPUT_HELP),
    check_ancestry: bool = typer.Option(False, "--check-ancestry", help="逐行校验递推条件（调试）"),
    threads: Optional[int] = typer.Option(
        None, "--threads", "-t", envvar=THREADS_ENV, help="线程数（精确算法按行向量化，不使用线程）"
    ),
):
    """O(n²) 精确亲缘矩阵。"""
    settings = _settings(ctx)
    try:
        run = RunConfig(
            subcommand="exact",
            inputs=tuple(p for p in (pedigree_path, psi_path, interest_path) if p),
            diagonal=diagonal or DiagonalConvention(settings.diagonal),
            psi_mode=_psi_mode(psi_path, average_psi),
            output=output,
            fmt=_check_format(fmt, settings),
            threads=threads if threads is not None else settings.threads,
        )
        if run.threads > 1:
            logger.info("精确算法逐行向量化计算，--threads 不影响它")
        pedigree = _read_pedigree(pedigree_path)
        psi = _read_psi(pedigree, psi_path, average_psi)
        interest = _read_interest(interest_path, pedigree)
        matrix = exact_kinship(pedigree, psi, check_ancestry=check_ancestry)
        if interest is not None:
            matrix = matrix.submatrix(interest)
        _emit_matrix(matrix.with_convention(run.diagonal), run.fmt, output)
    except PedkinError as e:
        _fail(e)
    ui.print_success(f"精确亲缘计算完成: {pedigree.n} 个个体")


@app.command(name="cut")
def cut(
    ctx: typer.Context,
    pedigree_path: str = typer.Argument(..., help="PED 系谱文件"),
    interest_path: str = typer.Option(..., "--interest", help="目标个体文件（每行一个 ID）"),
    max_segment: Optional[int] = typer.Option(None, "--max-segment", help="片段个体数上限"),
    cut_at: Optional[str] = typer.Option(None, "--cut-at", help="手动指定切割世代，如 2,3,4"),
    emit_plan: bool = typer.Option(False, "--emit-plan", help="显示切割方案"),
    threads: Optional[int] = typer.Option(
        None, "--threads", "-t", envvar=THREADS_ENV, help="线程数（各片段按顺序计算，不使用线程）"
    ),
    psi_path: Optional[str] = typer.Option(None, "--founder-kinship", "--psi", help="奠基者亲缘三元组文件"),
    average_psi: bool = typer.Option(False, "--average-psi", help="以平均近交系数初始化奠基者亲缘"),
    diagonal: Optional[DiagonalConvention] = typer.Option(None, "--diagonal", help="对角线约定"),
    fmt: Optional[str] = typer.Option(None, "--format", "-f", help="dense 或 triplet"),
    output: str = typer.Option("-", "--output", "-o", help=OUTPUT_HELP),
):
    """递归切割精确算法，只输出目标个体之间的亲缘。"""
    settings = _settings(ctx)
    boundaries: Optional[List[int]] = None
    if cut_at:
        try:
            boundaries = [int(x) for x in cut_at.split(",") if x.strip()]
        except ValueError:
            raise typer.BadParameter("必须是逗号分隔的整数", param_hint="--cut-at") from None
    try:
        run = RunConfig(
            subcommand="cut",
            inputs=tuple(p for p in (pedigree_path, interest_path, psi_path) if p),
            diagonal=diagonal or DiagonalConvention(settings.diagonal),
            psi_mode=_psi_mode(psi_path, average_psi),
            max_segment=max_segment if max_segment is not None else settings.max_segment,
            output=output,
            fmt=_check_format(fmt, settings),
            threads=threads if threads is not None else settings.threads,
        )
        if run.threads > 1:
            logger.info("片段依次计算，--threads 不影响递归切割")
        pedigree = _read_pedigree(pedigree_path)
        psi = _read_psi(pedigree, psi_path, average_psi)
        interest = _read_interest(interest_path, pedigree)

        plan = None
        if boundaries is not None:
            plan = plan_from_boundaries(pedigree, interest, boundaries)
        else:
            try:
                plan = plan_cuts(pedigree, interest, run.max_segment)
            except InterestPlacementError as e:
                ui.print_warning(f"{e}，改用整体精确算法")

        if plan is None:
            matrix = exact_kinship(pedigree, psi)
        else:
            if emit_plan:
                ui.print_cut_plan(plan.describe())
            matrix = recursive_cut_kinship(pedigree, psi, interest, plan)
        _emit_matrix(matrix.submatrix(interest).with_convention(run.diagonal), run.fmt, output)
    except PedkinError as e:
        _fail(e)
    ui.print_success(f"递归切割完成: {len(interest)} 个目标个体")


@app.command(name="sample")
def sample(
    ctx: typer.Context,
    pedigree_path: str = typer.Argument(..., help="PED 系谱文件"),
    interest_path: Optional[str] = typer.Option(None, "--interest", help="目标个体文件，缺省为全部个体"),
    samples: Optional[int] = typer.Option(None, "--samples", "-S", help="抽样次数 S"),
    seed: Optional[int] = typer.Option(None, "--seed", help="随机种子，缺省时生成并打印"),
    merge_rule: Optional[MergeRule] = typer.Option(None, "--merge-rule", help="奠基者合并规则"),
    threads: Optional[int] = typer.Option(None, "--threads", "-t", envvar=THREADS_ENV, help="线程数"),
    with_stderr: bool = typer.Option(False, "--stderr", help="追加标准误矩阵"),
    psi_path: Optional[str] = typer.Option(None, "--founder-kinship", "--psi", help="奠基者亲缘三元组文件"),
    average_psi: bool = typer.Option(False, "--average-psi", help="以平均近交系数初始化奠基者亲缘"),
    diagonal: Optional[DiagonalConvention] = typer.Option(None, "--diagonal", help="对角线约定"),
    fmt: Optional[str] = typer.Option(None, "--format", "-f", help="dense 或 triplet"),
    output: str = typer.Option("-", "--output", "-o", help=OUTPUT_HELP),
):
    """蒙特卡洛亲缘估计，每次重复线性时间。"""
    settings = _settings(ctx)
    if seed is None:
        seed = _fresh_seed()
        ui.print_seed(seed)
    try:
        run = RunConfig(
            subcommand="sample",
            inputs=tuple(p for p in (pedigree_path, interest_path, psi_path) if p),
            diagonal=diagonal or DiagonalConvention(settings.diagonal),
            psi_mode=_psi_mode(psi_path, average_psi),
            samples=samples if samples is not None else settings.samples,
            seed=seed,
            merge_rule=merge_rule or MergeRule(settings.merge_rule),
            output=output,
            fmt=_check_format(fmt, settings),
            threads=threads if threads is not None else settings.threads,
        )
        pedigree = _read_pedigree(pedigree_path)
        psi = _read_psi(pedigree, psi_path, average_psi)
        interest = _read_interest(interest_path, pedigree) or pedigree.ids
        config = SamplerConfig(samples=run.samples, seed=seed, merge_rule=run.merge_rule, threads=run.threads)
        estimate = estimate_kinship(pedigree, psi, interest, config)

        errors = None
        if with_stderr:
            if estimate.stderr is None:
                raise ConfigError("计算标准误至少需要 S >= 2")
            errors = estimate.stderr.copy()
            if run.diagonal is DiagonalConvention.SELF_KINSHIP:
                np.fill_diagonal(errors, np.diag(errors) / 2.0)
        _emit_matrix(estimate.matrix.with_convention(run.diagonal), run.fmt, output, errors)
    except PedkinError as e:
        _fail(e)
    ui.print_success(f"抽样完成: S={run.samples}, seed={seed}")


@app.command(name="simulate")
def simulate(
    model: str = typer.Option("wf", "--model", "-m", help="wf（Wright-Fisher）或 random"),
    pairs: int = typer.Option(10, "-N", help="每代配对数（wf）"),
    generations: int = typer.Option(5, "-G", help="世代数（wf）"),
    monogamous: bool = typer.Option(False, "--monogamous", help="每代固定配对（wf）"),
    size: int = typer.Option(10, "-n", help="个体数（random）"),
    founders: float = typer.Option(0.3, "--founders", help="奠基者比例（random）"),
    seed: Optional[int] = typer.Option(None, "--seed", help="随机种子，缺省时生成并打印"),
    output: str = typer.Option("-", "--output", "-o", help=OUTPUT_HELP),
):
    """生成合成系谱。"""
    if model not in ("wf", "random"):
        raise typer.BadParameter("必须是 wf 或 random", param_hint="--model")
    if seed is None:
        seed = _fresh_seed()
        ui.print_seed(seed)
    try:
        if model == "wf":
            pedigree = wright_fisher_pedigree(
                WrightFisherParams(N=pairs, G=generations, seed=seed, monogamous=monogamous)
            )
        else:
            pedigree = random_pedigree(size, founders, seed)
        with click.open_file(output, mode="w", encoding="utf-8") as sink:
            write_pedigree(pedigree, sink)
    except PedkinError as e:
        _fail(e)
    ui.print_success(f"已生成系谱: {pedigree.n} 个个体")


@app.command(name="ancestors")
def ancestors(
    pedigree_path: str = typer.Argument(..., help="PED 系谱文件"),
    individual: str = typer.Argument(..., help="个体 ID"),
    output: str = typer.Option("-", "--output", "-o", help=OUTPUT_HELP),
):
    """列出祖先集合 A_id（个体自身及其全部祖先）。"""
    try:
        RunConfig(subcommand="ancestors", inputs=(pedigree_path,), output=output)
        pedigree = _read_pedigree(pedigree_path)
        members = compute_ancestor_sets(pedigree).members(individual)
        with click.open_file(output, mode="w", encoding="utf-8") as sink:
            for member in members:
                sink.write(member + "\n")
    except PedkinError as e:
        _fail(e)
    ui.print_info(f"{individual} 共有 {len(members) - 1} 个祖先")


@app.command(name="states")
def states(output: str = typer.Option("-", "--output", "-o", help=OUTPUT_HELP)):
    """列出 15 个详细身份状态及其 9 个凝聚分组。"""
    rows = state_table()
    columns = ["detailed", "condensed", "partition", "aa", "ab", "bb", "founder_alleles", "outbred"]
    with click.open_file(output, mode="w", encoding="utf-8") as sink:
        sink.write("\t".join(columns) + "\n")
        for row in rows:
            sink.write("\t".join(str(row[c]).lower() if c == "outbred" else str(row[c]) for c in columns) + "\n")
    ui.print_state_table(rows)


@app.command(name="verify")
def verify(
    ctx: typer.Context,
    pedigree_path: str = typer.Argument(..., help="PED 系谱文件"),
    matrix_path: Optional[str] = typer.Option(None, "--matrix", help="待检验的矩阵文件，缺省时检验精确算法"),
    tol: float = typer.Option(1e-12, "--tol", help="允许的最大绝对误差"),
    threads: Optional[int] = typer.Option(None, "--threads", "-t", envvar=THREADS_ENV, help="线程数"),
):
    """以穷举预言机检验精确算法或给定矩阵，不一致时退出码为 1。"""
    settings = _settings(ctx)
    try:
        run = RunConfig(
            subcommand="verify",
            inputs=tuple(p for p in (pedigree_path, matrix_path) if p),
            threads=threads if threads is not None else settings.threads,
        )
        pedigree = _read_pedigree(pedigree_path)
        truth = brute_force_kinship(pedigree, threads=run.threads)
        ui.print_info(f"穷举了 {truth.enumerations} 条遗传路径")
        if matrix_path is None:
            candidate = exact_kinship(pedigree)
        else:
            with click.open_file(matrix_path, encoding="utf-8") as f:
                candidate = read_kinship_matrix(f, ids=pedigree.ids)
            candidate = candidate.with_convention(DiagonalConvention.INBREEDING)
        report = compare_matrices(truth.matrix.submatrix(candidate.ids), candidate, tol)
    except PedkinError as e:
        _fail(e)
    ui.print_comparison_report(report)
    if not report.ok:
        raise typer.Exit(code=1)


@app.command(name="bench")
def bench(
    ctx: typer.Context,
    model: str = typer.Option("wf", "--model", "-m", help="目前只支持 wf"),
    pairs: int = typer.Option(50, "-N", help="每代配对数"),
    generations: int = typer.Option(10, "-G", help="起始世代数，之后逐步翻倍"),
    algos: str = typer.Option("exact,cut,sample", "--algos", help="逗号分隔的算法列表"),
    steps: int = typer.Option(3, "--steps", help="规模点个数"),
    samples: int = typer.Option(200, "--samples", "-S", help="抽样器每个规模点的重复次数"),
    repeats: int = typer.Option(3, "--repeats", help="每个点取最快的 r 次"),
    seed: Optional[int] = typer.Option(None, "--seed", help="随机种子，缺省时生成并打印"),
    threads: Optional[int] = typer.Option(None, "--threads", "-t", envvar=THREADS_ENV, help="线程数"),
    output: str = typer.Option("-", "--output", "-o", help=OUTPUT_HELP),
):
    """在 Wright-Fisher 系谱上计时并拟合标度指数。"""
    if model != "wf":
        raise typer.BadParameter("目前只支持 wf", param_hint="--model")
    settings = _settings(ctx)
    if seed is None:
        seed = _fresh_seed()
        ui.print_seed(seed)
    try:
        run = RunConfig(
            subcommand="bench",
            samples=samples,
            seed=seed,
            threads=threads if threads is not None else settings.threads,
        )
        runners = [
            create_runner(name.strip(), samples=run.samples, seed=seed, threads=run.threads)
            for name in algos.split(",")
            if name.strip()
        ]
        if not runners:
            raise ConfigError("至少需要一个算法")
        harness = BenchmarkHarness(runners, N=pairs, G=generations, steps=steps, repeats=repeats, seed=seed)
        report = harness.run()
    except PedkinError as e:
        _fail(e)

    columns = ["algo", "N", "G", "n", "work", "seconds"]
    with click.open_file(output, mode="w", encoding="utf-8") as sink:
        sink.write("\t".join(columns) + "\n")
        for row in report.as_rows():
            sink.write("\t".join(str(row[c]) for c in columns) + "\n")
        for name, fit in report.fits.items():
            sink.write(f"# fit {name} {fit.kind} slope={fit.slope:.6g} r2={fit.r_squared:.6g}\n")
    ui.print_bench_table(report.as_rows(), {name: fit.describe() for name, fit in report.fits.items()})


@app.command(name="config-init")
def config_init(
    path: Optional[str] = typer.Option(None, "--path", help="配置文件路径，缺省为 pedkin.yaml"),
    force: bool = typer.Option(False, "--force", help="覆盖已有文件"),
):
    """写出默认配置文件。"""
    manager = RunConfigManager(path)
    if manager.has_config_file() and not force:
        ui.print_warning(f"{manager.config_path} 已存在，使用 --force 覆盖")
        raise typer.Exit(code=1)
    if not manager.save_config(manager.generate_default_config()):
        raise typer.Exit(code=1)


def _setup_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@app.callback()
def callback(
    ctx: typer.Context,
    config_path: Optional[str] = typer.Option(None, "--config", help="YAML 配置文件（也可用 PEDKIN_CONFIG）"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG / INFO / WARNING / ERROR"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="只输出错误"),
    no_color: bool = typer.Option(False, "--no-color", help="关闭彩色输出"),
):
    """
    pedkin: 精确、递归切割与蒙特卡洛亲缘系数计算。
    """
    ui.configure(UIConfig(use_colors=not no_color, quiet=quiet))
    manager = RunConfigManager(config_path)
    try:
        settings = manager.load()
    except ConfigError as e:
        _fail(e)
    _setup_logging(log_level or settings.log_level)
    ctx.obj = {"settings": settings}


def main():
    """主入口点函数，供 pyproject.toml 使用"""
    app()


if __name__ == "__main__":
    main()
