"""sqlgate: a per-function SQL query firewall.

Learns, from tagged benign traffic, which query shapes each application
function may issue and blocks anything that deviates.
"""

__version__ = "0.1.0"
