"""
CLI commands
One module per subcommand, each exposing add_parser() and run()
"""

from app.commands import best, classify, cost, reproduce, spiral, sweep, validate

COMMANDS = [classify, cost, spiral, best, sweep, reproduce, validate]

__all__ = ["COMMANDS"]
