"""Robot hardware design search scored by human and robot joint torques in shared lifting tasks."""

__version__ = "0.1.0"
