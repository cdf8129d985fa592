"""Voice-driven command runtime for a simulated assistive feeding robot.

Pipeline: wake phrase -> utterance capture -> transcription -> LLM code
generation -> whitelist parse -> safety validation -> simulated execution,
with feedback cues throughout and a wire protocol for the control panel.
"""

from .config import AppConfig, load_config
from .errors import VoicePilotError

__version__ = "0.1.0"

__all__ = ["AppConfig", "load_config", "VoicePilotError", "__version__"]
