"""
CimLab: 桌面规模存内计算可靠性实验室
"""

__version__ = "0.1.0"
