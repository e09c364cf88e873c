"""
文件读写
PED 风格系谱输入、亲缘矩阵输出（dense / triplet）以及奠基者亲缘三元组
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, TextIO, Tuple

import numpy as np

from ..errors import (
    DuplicateIndividualError,
    FounderKinshipError,
    HalfFounderError,
    PedigreeFormatError,
    UnknownIndividualError,
)
from ..kinship.matrix import DiagonalConvention, FounderKinship, KinshipMatrix
from .model import IndividualRecord, Pedigree, Sex

logger = logging.getLogger(__name__)

SEX_TOKENS = {
    "1": Sex.MALE, "m": Sex.MALE, "male": Sex.MALE,
    "2": Sex.FEMALE, "f": Sex.FEMALE, "female": Sex.FEMALE,
    "0": Sex.UNKNOWN, "u": Sex.UNKNOWN, "unknown": Sex.UNKNOWN, "-9": Sex.UNKNOWN,
}

MATRIX_FORMATS = ("dense", "triplet")
STANDARD_ERROR_HEADER = "# standard-errors"


@dataclass
class ParseOptions:
    """PED 解析选项"""

    family_column: Optional[bool] = None  # None 表示按列数自动检测（>=5 列视为带家系列）
    synthesize_missing_parents: bool = True
    missing_tokens: FrozenSet[str] = field(default_factory=lambda: frozenset({"0"}))


def _data_lines(source: TextIO):
    for line_number, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield line_number, line


def _unique_dummy_id(base: str, taken: Dict[str, object]) -> str:
    candidate = base
    k = 1
    while candidate in taken:
        k += 1
        candidate = f"{base}{k}"
    return candidate


def parse_pedigree(source: TextIO, options: Optional[ParseOptions] = None) -> Pedigree:
    """
    解析 PED 风格的系谱。

    列依次为 个体 父亲 母亲 性别（可选的首列家系 ID 会被自动识别并忽略），
    "0" 表示缺失亲本，以 "#" 开头的行为注释。仅作为亲本出现的 ID 会被补成奠基者。

    Args:
        source: 行文本流
        options: 解析选项

    Returns:
        Pedigree: 经过验证的系谱
    """
    options = options or ParseOptions()
    declared: Dict[str, IndividualRecord] = {}
    has_family = options.family_column
    missing = options.missing_tokens

    for line_number, line in _data_lines(source):
        tokens = line.split()
        if has_family is None:
            has_family = len(tokens) >= 5
        offset = 1 if has_family else 0
        if len(tokens) < offset + 4:
            raise PedigreeFormatError(f"需要至少 {offset + 4} 列，实际 {len(tokens)} 列", line_number)
        iid, fid, mid, sex_token = tokens[offset:offset + 4]
        if iid in missing:
            raise PedigreeFormatError(f"个体 ID 不能为缺失值 '{iid}'", line_number)
        sex = SEX_TOKENS.get(sex_token.lower())
        if sex is None:
            raise PedigreeFormatError(f"无法识别的性别 '{sex_token}'", line_number)
        if iid in declared:
            raise DuplicateIndividualError(iid, line_number)
        declared[iid] = IndividualRecord(
            id=iid,
            sex=sex,
            mother=None if mid in missing else mid,
            father=None if fid in missing else fid,
        )

    records: Dict[str, IndividualRecord] = dict(declared)
    materialized: Dict[str, IndividualRecord] = {}
    for rec in list(declared.values()):
        mother, father = rec.mother, rec.father
        if (mother is None) != (father is None):
            if not options.synthesize_missing_parents:
                raise HalfFounderError(f"个体 {rec.id} 只有一个已知亲本")
            role = "mother" if mother is None else "father"
            dummy = _unique_dummy_id(f"{rec.id}__missing_{role}", {**records, **materialized})
            materialized[dummy] = IndividualRecord(
                id=dummy,
                sex=Sex.FEMALE if role == "mother" else Sex.MALE,
                synthesized=True,
            )
            if role == "mother":
                mother = dummy
            else:
                father = dummy
            records[rec.id] = IndividualRecord(rec.id, rec.sex, mother, father)
            logger.info(f"为 {rec.id} 合成虚拟奠基者 {dummy}")
        for parent_id, parent_sex in ((father, Sex.MALE), (mother, Sex.FEMALE)):
            if parent_id is not None and parent_id not in records and parent_id not in materialized:
                materialized[parent_id] = IndividualRecord(id=parent_id, sex=parent_sex)

    ordered = [records[i] for i in declared] + list(materialized.values())
    pedigree = Pedigree(ordered)
    logger.info(f"读取系谱: {pedigree.n} 个个体, {len(pedigree.founders)} 个奠基者")
    return pedigree


def write_pedigree(pedigree: Pedigree, sink: TextIO) -> None:
    """按稠密下标顺序写出规范化的 PED 行：个体 父亲 母亲 性别"""
    sink.write("# id\tfather\tmother\tsex\n")
    for rec in pedigree.records:
        sink.write(f"{rec.id}\t{rec.father or '0'}\t{rec.mother or '0'}\t{rec.sex.code}\n")


def read_interest(source: TextIO, pedigree: Pedigree) -> Tuple[str, ...]:
    """读取目标个体列表（每行一个 ID），重复项只保留第一次出现"""
    seen: Dict[str, None] = {}
    for _, line in _data_lines(source):
        iid = line.split()[0]
        if iid not in pedigree:
            raise UnknownIndividualError(iid)
        seen.setdefault(iid, None)
    return tuple(seen)


def _format_value(v: float) -> str:
    return format(float(v), ".17g")


def _write_block(ids: Tuple[str, ...], values: np.ndarray, fmt: str, sink: TextIO) -> None:
    if fmt == "dense":
        sink.write("\t".join(ids) + "\n")
        for row in values:
            sink.write("\t".join(_format_value(v) for v in row) + "\n")
    elif fmt == "triplet":
        n = len(ids)
        for i in range(n):
            for j in range(i, n):
                if values[i, j] != 0.0:
                    sink.write(f"{ids[i]}\t{ids[j]}\t{_format_value(values[i, j])}\n")
    else:
        raise ValueError(f"未知的矩阵格式: {fmt}")


def write_kinship_matrix(matrix: KinshipMatrix, fmt: str, sink: TextIO) -> None:
    """
    写出亲缘矩阵。

    dense 为 ID 表头加 n 行制表符分隔的数值（17 位有效数字）；
    triplet 为上三角（含对角线）的非零元素 "id_i id_j value"。
    注释头记录对角线约定与格式。
    """
    sink.write(f"# diagonal={matrix.convention.value}\n")
    sink.write(f"# format={fmt}\n")
    _write_block(matrix.ids, matrix.values, fmt, sink)


def write_standard_errors(ids: Tuple[str, ...], values: np.ndarray, fmt: str, sink: TextIO) -> None:
    """在矩阵之后追加标准误块"""
    sink.write(STANDARD_ERROR_HEADER + "\n")
    _write_block(tuple(ids), values, fmt, sink)


def read_kinship_matrix(source: TextIO, ids: Optional[Tuple[str, ...]] = None) -> KinshipMatrix:
    """
    读回 write_kinship_matrix 的输出。

    格式由 "# format=" 注释决定；triplet 格式省略了零元素，可通过 ids 指定完整的个体集合。
    读到标准误块时停止。
    """
    meta: Dict[str, str] = {}
    rows: List[List[str]] = []
    for raw in source:
        line = raw.strip()
        if line == STANDARD_ERROR_HEADER:
            break
        if not line:
            continue
        if line.startswith("#"):
            for item in line.lstrip("#").split():
                if "=" in item:
                    key, value = item.split("=", 1)
                    meta[key] = value
            continue
        rows.append(line.split())

    try:
        convention = DiagonalConvention(meta.get("diagonal", DiagonalConvention.INBREEDING.value))
    except ValueError:
        raise PedigreeFormatError(f"未知的对角线约定: {meta['diagonal']}") from None
    fmt = meta.get("format") or ("triplet" if rows and len(rows[0]) == 3 else "dense")

    if fmt == "dense":
        if not rows:
            raise PedigreeFormatError("dense 矩阵缺少表头")
        header = tuple(rows[0])
        body = rows[1:1 + len(header)]
        if len(body) != len(header) or any(len(r) != len(header) for r in body):
            raise PedigreeFormatError("dense 矩阵的行数或列数与表头不一致")
        values = np.array([[float(x) for x in r] for r in body], dtype=np.float64)
        return KinshipMatrix(header, values.reshape(len(header), len(header)), convention)

    entries = []
    order: Dict[str, None] = dict.fromkeys(ids or ())
    for r in rows:
        if len(r) != 3:
            raise PedigreeFormatError(f"triplet 行应为 3 列: {' '.join(r)}")
        a, b, v = r[0], r[1], float(r[2])
        order.setdefault(a, None)
        order.setdefault(b, None)
        entries.append((a, b, v))
    all_ids = tuple(order)
    pos = {k: i for i, k in enumerate(all_ids)}
    values = np.zeros((len(all_ids), len(all_ids)))
    for a, b, v in entries:
        values[pos[a], pos[b]] = v
        values[pos[b], pos[a]] = v
    return KinshipMatrix(all_ids, values, convention)


def read_founder_kinship(source: TextIO, pedigree: Pedigree) -> FounderKinship:
    """
    读取奠基者亲缘三元组 "founder_i founder_j value"。

    对角线行给出奠基者近交系数 Ψ_ff；未给出的元素为 0；矩阵自动对称。
    """
    founders = pedigree.founder_ids()
    pos = {f: i for i, f in enumerate(founders)}
    matrix = np.zeros((len(founders), len(founders)))
    given: Dict[Tuple[int, int], float] = {}

    for line_number, line in _data_lines(source):
        tokens = line.split()
        if len(tokens) != 3:
            raise PedigreeFormatError("奠基者亲缘行应为 'founder_i founder_j value'", line_number)
        a, b, raw_value = tokens
        for f in (a, b):
            if f not in pedigree:
                raise UnknownIndividualError(f)
            if f not in pos:
                raise FounderKinshipError(f"第 {line_number} 行: {f} 不是奠基者")
        try:
            value = float(raw_value)
        except ValueError:
            raise PedigreeFormatError(f"无法解析数值 '{raw_value}'", line_number) from None
        if not 0.0 <= value <= 1.0:
            raise FounderKinshipError(f"第 {line_number} 行: 数值 {value} 超出 [0, 1]")
        key = tuple(sorted((pos[a], pos[b])))
        if key in given and given[key] != value:
            raise FounderKinshipError(f"第 {line_number} 行: {a}-{b} 的取值与之前的记录矛盾")
        given[key] = value
        matrix[key[0], key[1]] = value
        matrix[key[1], key[0]] = value

    logger.info(f"读取奠基者亲缘: {len(given)} 个非零条目, {len(founders)} 个奠基者")
    return FounderKinship.full(founders, matrix)
