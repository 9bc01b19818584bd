# Import all subcommands
from . import density_command
from . import converge_command
from . import laminate_command
from . import solve_command
from . import verify_command

COMMANDS = {
    'density': density_command,
    'converge': converge_command,
    'laminate': laminate_command,
    'solve': solve_command,
    'verify': verify_command,
}

__all__ = ['COMMANDS']
