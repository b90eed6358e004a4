# duqc/__init__.py
"""DUQC 包初始化文件。

对偶幺正量子线路（一维/二维）的快速路径计算、误差预算、
稠密态矢量校验器以及构造性编译器。
"""

__version__ = "1.0.0"
__author__ = "DUQC Team"
__description__ = "对偶幺正量子线路模拟与校验工具"
