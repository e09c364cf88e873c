"""
命令行用户界面模块
所有诊断信息写到 stderr，stdout 只留给机器可读的矩阵与系谱输出
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

from rich.console import Console
from rich.table import Table


class Colors:
    """rich 样式名"""

    INFO = "bright_blue"
    SUCCESS = "bright_green"
    WARNING = "bright_yellow"
    ERROR = "bright_red"
    HEADER = "bold bright_white"
    BORDER = "bright_blue"
    DIM = "dim"


@dataclass
class UIConfig:
    """UI配置选项"""

    use_colors: bool = True
    quiet: bool = False


class ModernUI:
    """命令行用户界面"""

    def __init__(self, config: Optional[UIConfig] = None):
        self.config = config or UIConfig()
        self.console = Console(stderr=True, no_color=not self.config.use_colors, highlight=False)

    def configure(self, config: UIConfig) -> None:
        self.config = config
        self.console = Console(stderr=True, no_color=not config.use_colors, highlight=False)

    def _print(self, text: str, style: str = "") -> None:
        if self.config.quiet:
            return
        self.console.print(text, style=style or None, markup=False)

    def print_section_header(self, title: str, icon: str = "📋") -> None:
        """显示区块标题"""
        if self.config.quiet:
            return
        self._print("")
        header = f"{icon} {title}"
        separator = "-" * (len(header) + 4)
        self._print(f"+--{separator}--+", Colors.BORDER)
        self._print(f"|  {header}  |", Colors.HEADER)
        self._print(f"+--{separator}--+", Colors.BORDER)

    def print_error(self, error_message: str) -> None:
        """显示错误信息（quiet 模式下也输出）"""
        self.console.print(f"❌ 错误: {error_message}", style=Colors.ERROR, markup=False)

    def print_warning(self, warning_message: str) -> None:
        self._print(f"⚠️  警告: {warning_message}", Colors.WARNING)

    def print_info(self, info_message: str) -> None:
        self._print(f"💡 {info_message}", Colors.INFO)

    def print_success(self, success_message: str) -> None:
        self._print(f"✅ {success_message}", Colors.SUCCESS)

    def print_seed(self, seed: int) -> None:
        """随机子命令未给出 --seed 时打印生成的种子，保证可复现"""
        self.console.print(f"seed={seed}", markup=False)

    def _table(self, title: str, columns: Sequence[str], rows: List[Sequence[Any]]) -> None:
        if self.config.quiet:
            return
        table = Table(title=title, header_style=Colors.HEADER, border_style=Colors.BORDER)
        for column in columns:
            table.add_column(column)
        for row in rows:
            table.add_row(*[str(cell) for cell in row])
        self.console.print(table)

    def print_state_table(self, rows: List[Dict[str, Any]]) -> None:
        """15 个详细身份状态，按 9 个凝聚状态分组"""
        columns = ["详细", "凝聚", "划分", "e(aa)", "e(ab)", "e(bb)", "奠基者等位基因", "非近交"]
        body = [
            [
                r["detailed"],
                f"Δ{r['condensed']}",
                r["partition"],
                r["aa"],
                r["ab"],
                r["bb"],
                r["founder_alleles"],
                "是" if r["outbred"] else "否",
            ]
            for r in rows
        ]
        self._table("身份状态", columns, body)

    def print_cut_plan(self, lines: List[str]) -> None:
        self.print_section_header("切割方案", "✂️")
        for line in lines:
            self._print(f"   {line}", Colors.DIM)

    def print_comparison_report(self, report: Any, limit: int = 20) -> None:
        """显示矩阵比较结果，最多列出 limit 个超差条目"""
        if report.ok:
            self.print_success(f"矩阵一致: 最大差值 {report.max_abs_diff:.3g} ≤ {report.tolerance:.3g}")
            return
        self.print_error(f"矩阵不一致: 最大差值 {report.max_abs_diff:.3g} > {report.tolerance:.3g}")
        rows = [[i, j, f"{a:.17g}", f"{b:.17g}"] for i, j, a, b in report.offending[:limit]]
        self._table("超差条目", ["i", "j", "期望", "实际"], rows)
        if len(report.offending) > limit:
            self._print(f"   ... 另有 {len(report.offending) - limit} 个条目", Colors.DIM)

    def print_bench_table(self, rows: List[Dict[str, Any]], fits: Dict[str, str]) -> None:
        """显示基准测试的计时表和拟合的标度指数"""
        body = [
            [r["algo"], r["N"], r["G"], r["n"], r["work"], f"{r['seconds']:.4f}"]
            for r in rows
        ]
        self._table("基准测试", ["算法", "N", "G", "n", "规模", "秒"], body)
        for name, text in fits.items():
            self._print(f"   {name}: {text}", Colors.INFO)


# 全局UI实例
ui = ModernUI()
