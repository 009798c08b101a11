"""Python access to the ecgm simulation core."""

import json

from ._ecgm import (
    DataRow,
    EcgmError,
    StreamDecoder,
    add_noise,
    afe_pipeline,
    battery_runtime,
    charge_compliance,
    code_name,
    compute_checksum,
    decode_session,
    detect_qrs,
    encode_packet,
    gen_ecg,
    hr_from_peaks,
    magnitude_response,
    rails_check,
    reassemble,
    segment,
)
from . import _ecgm


def default_config():
    """Run configuration with every key at its default."""
    return json.loads(_ecgm._default_config())


def run_e2e(config=None, **overrides):
    """Run generator through host and return the summary as a dict.

    Keys match the CLI's --config JSON; keyword overrides win over config.
    """
    merged = dict(config or {})
    merged.update(overrides)
    try:
        text = json.dumps(merged)
    except TypeError as e:
        raise EcgmError(str(e)) from e
    return json.loads(_ecgm._run_e2e(text))


__all__ = [
    "DataRow",
    "EcgmError",
    "StreamDecoder",
    "add_noise",
    "afe_pipeline",
    "battery_runtime",
    "charge_compliance",
    "code_name",
    "compute_checksum",
    "decode_session",
    "default_config",
    "detect_qrs",
    "encode_packet",
    "gen_ecg",
    "hr_from_peaks",
    "magnitude_response",
    "rails_check",
    "reassemble",
    "run_e2e",
    "segment",
]
