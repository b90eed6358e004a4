# duqc/errors.py
"""DUQC 异常定义。

CLI 根据异常类型映射退出码：输入错误为 2，资源上限为 4。
"""

from typing import Any, Optional


class DUQCError(Exception):
    """所有 DUQC 异常的基类。"""

    exit_code = 2


class InvalidParameterError(DUQCError, ValueError):
    """参数不满足前置条件（非幺正单比特门、N < 1 等）。"""


class NotDualUnitaryError(InvalidParameterError):
    """在要求对偶幺正的位置放置了非对偶幺正门。"""

    def __init__(self, message: str, layer: Optional[int] = None,
                 bond: Optional[Any] = None):
        super().__init__(message)
        self.layer = layer
        self.bond = bond


class NotSolvableError(InvalidParameterError):
    """初态张量不满足可解条件。"""

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report


class UnreachablePairError(InvalidParameterError):
    """SWAP 传送带上两个位点永远不会相遇。"""


class CapExceededError(DUQCError):
    """比特数超过稠密 oracle 的上限。"""

    exit_code = 4

    def __init__(self, num_qubits: int, cap: int, what: str = "oracle"):
        super().__init__(f"{what} 需要 {num_qubits} 个比特，超过上限 {cap}")
        self.num_qubits = num_qubits
        self.cap = cap


class NormalizationError(DUQCError):
    """态矢量范数为零或偏离 1 超出容差。"""


class SpectrumError(DUQCError):
    """转移矩阵谱不满足唯一最大本征值条件，或本征求解失败。"""


class SerializationError(DUQCError):
    """JSON 文件格式错误。"""
