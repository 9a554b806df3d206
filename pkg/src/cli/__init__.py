"""Command-line surface and market files"""

from .commands import cmd_check, cmd_gen, cmd_identify, cmd_index, cmd_simulate
from .market_file import MarketFile, dump_market, load_market, parse_market

__all__ = [
    'MarketFile',
    'cmd_check',
    'cmd_gen',
    'cmd_identify',
    'cmd_index',
    'cmd_simulate',
    'dump_market',
    'load_market',
    'parse_market',
]
