import numpy as np
import pytest

from harbench.data import ChannelMeta, Dataset, SyntheticSpec, Trial, default_channels, generate_synthetic

SMALL = SyntheticSpec(n_subjects=3, n_activities=2, trials_per_pair=2, trial_len_steps=1000)


def make_trial(tid, subj="s0", label="a", n=1000, channels=3, rate=50.0, seed=0):
    data = np.random.default_rng(seed).normal(size=(n, channels))
    return Trial(tid, subj, label, rate, default_channels(channels), data)


@pytest.fixture
def small_dataset():
    return generate_synthetic(SMALL, 3)


@pytest.fixture
def one_trial_dataset():
    return Dataset("one", (make_trial("t0"),))


@pytest.fixture
def two_channel_meta():
    return (ChannelMeta("acc_x", "accelerometer", "wrist"), ChannelMeta("acc_y", "accelerometer", "wrist"))


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[key])
