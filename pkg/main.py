#!/usr/bin/env python3
"""
pedkin 主入口点
委托给 CLI 模块
"""

from pedkin.cli import main

if __name__ == "__main__":
    main()
