# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Logger."""

import os
import sys

_TRUTHY = {"1", "true", "yes", "debug", "info"}


class Log:  # pylint: disable=too-few-public-methods
    """Logger.

    Verbosity starts from the ``DENSEK_LOG`` environment variable and can be
    switched at runtime through ``Log.VERBOSE``.
    """

    VERBOSE = os.environ.get("DENSEK_LOG", "").strip().lower() in _TRUTHY

    @staticmethod
    def log(*args):
        """Log arguments."""
        if Log.VERBOSE:
            print(*args, file=sys.stderr)
