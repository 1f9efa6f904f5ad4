"""Package defining various Utility features."""

from .callbacks import callback_failure, callback_result
from .checks import Check
from .output import (
    echo,
    err,
    hl_value,
    newLogger,
    P,
    set_verbosity,
    table,
    verdict,
    warn,
)
