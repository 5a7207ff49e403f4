import pytest

from dosn import DOSN, PublishParams, Rng


def make_net(miners=6, seed=0, users=("alice", "bob", "carol")):
    net = DOSN(seed)
    for _ in range(miners):
        net.add_miner()
    for u in users:
        net.add_user(u)
    return net


@pytest.fixture
def net():
    return make_net()


@pytest.fixture
def posted(net):
    """alice posts 100 KiB readable by bob (friend); carol is not in the ACL."""
    alice, bob = net.users["alice"], net.users["bob"]
    content = Rng(99).randbytes(100 * 1024)
    rec = net.publish(alice, content, {bob.address: "friend"}, ["friend"],
                      PublishParams(t=3, n=5, r=2, chunk_size=16 * 1024))
    return net, rec, content


_acceptance_lines = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        status = "PASS" if report.passed else "FAIL"
        _acceptance_lines.append(f"[{status}] AC{marker.args[0]} {marker.args[1]} ({report.duration:.2f}s)")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
