from logging import getLogger

logger = getLogger("efebo")
"""
The logger `efebo` is using.
"""
