# rl/states.py - Discretized execution state of a device or of the fleet
from collections import Counter
from typing import Iterable, NamedTuple, Sequence, Tuple

from core.domain import WorkloadProfile
from fl.datasets import ClientDataset
from sim.variance import BAD_SIGNAL_MBPS, InterferenceState, NetworkSample

CONV_BINS = ("small", "medium", "large", "larger")
FC_BINS = ("small", "large")
RC_BINS = ("small", "medium", "large")
USAGE_BINS = ("none", "small", "medium", "large")
NETWORK_BINS = ("regular", "bad")
DATA_BINS = ("small", "medium", "large")


class StateVector(NamedTuple):
    s_conv: str
    s_fc: str
    s_rc: str
    s_co_cpu: str
    s_co_mem: str
    s_network: str
    s_data: str

    def key(self) -> str:
        return ",".join(self)


STATE_SPACE_SIZE = len(CONV_BINS) * len(FC_BINS) * len(RC_BINS) * len(USAGE_BINS) ** 2 * len(NETWORK_BINS) * len(DATA_BINS)


def bin_conv(n: int) -> str:
    # 30-39 falls in the table's gap; it is treated as large
    if n < 10:
        return "small"
    if n < 20:
        return "medium"
    if n < 40:
        return "large"
    return "larger"


def bin_fc(n: int) -> str:
    return "small" if n < 10 else "large"


def bin_rc(n: int) -> str:
    if n < 5:
        return "small"
    if n < 10:
        return "medium"
    return "large"


def bin_usage(fraction: float) -> str:
    if fraction == 0:
        return "none"
    if fraction < 0.25:
        return "small"
    if fraction < 0.75:
        return "medium"
    return "large"


def bin_network(bandwidth: float) -> str:
    return "regular" if bandwidth > BAD_SIGNAL_MBPS else "bad"


def bin_data(coverage: float) -> str:
    if coverage < 0.25:
        return "small"
    if coverage < 1.0:
        return "medium"
    return "large"


def workload_bins(workload: WorkloadProfile) -> Tuple[str, str, str]:
    return bin_conv(workload.conv_layers), bin_fc(workload.fc_layers), bin_rc(workload.rc_layers)


def observe_state(
    workload: WorkloadProfile,
    interference: InterferenceState,
    net: NetworkSample,
    data: ClientDataset,
    n_classes_total: int,
) -> StateVector:
    coverage = data.classes_present / n_classes_total
    return StateVector(
        *workload_bins(workload),
        bin_usage(interference.co_cpu),
        bin_usage(interference.co_mem),
        bin_network(net.bandwidth),
        bin_data(coverage),
    )


def _modal(values: Iterable[str], order: Sequence[str]) -> str:
    """Most common bin; ties go to the bin listed first"""
    counts = Counter(values)
    return max(order, key=lambda b: (counts.get(b, 0), -order.index(b)))


def fleet_state(workload: WorkloadProfile, device_states: Iterable[StateVector]) -> StateVector:
    """Workload bins plus the modal runtime and data bins over devices"""
    states = list(device_states)
    return StateVector(
        *workload_bins(workload),
        _modal((s.s_co_cpu for s in states), USAGE_BINS),
        _modal((s.s_co_mem for s in states), USAGE_BINS),
        _modal((s.s_network for s in states), NETWORK_BINS),
        _modal((s.s_data for s in states), DATA_BINS),
    )


def parse_state(text: str) -> StateVector:
    return StateVector(*text.split(","))
