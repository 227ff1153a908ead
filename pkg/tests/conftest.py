import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from cspmkt import DuopolyParams, MonopolyParams  # noqa: E402

_ACCEPTANCE: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        num, title = mark.args
        entry = _ACCEPTANCE.setdefault(num, {"title": title, "ok": True, "detail": []})
        entry["ok"] = entry["ok"] and rep.passed
        detail = getattr(item, "acceptance_detail", None)
        if detail:
            entry["detail"].append(detail)


@pytest.fixture
def record(request):
    """Attach a one-line measurement to the acceptance summary."""

    def _record(text: str):
        request.node.acceptance_detail = text

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[num]
        status = "PASS" if e["ok"] else "FAIL"
        extra = f"  [{'; '.join(e['detail'])}]" if e["detail"] else ""
        terminalreporter.write_line(f"criterion {num:>2} {status}: {e['title']}{extra}")


@pytest.fixture
def mono_base():
    return MonopolyParams(u0_b=1.9, u0_c=2.1, b_b=0.5, b_c=0.7, t_b=1.1, t_c=1.5, f_b=0.73, f_c=0.75)


@pytest.fixture
def duo_base():
    return DuopolyParams(alpha_n=0.7, alpha_w=0.6, beta_n=0.5, beta_w=0.8, t_b=1.1, t_c=1.2,
                         f_wb=0.7, f_nb=0.73, f_wc=0.73, f_nc=0.75)


@pytest.fixture
def duo_symmetric():
    return DuopolyParams(alpha_n=0.65, alpha_w=0.65, beta_n=0.65, beta_w=0.65, t_b=1.1, t_c=1.2,
                         f_wb=0.7, f_nb=0.7, f_wc=0.73, f_nc=0.73)


@pytest.fixture
def onesided_base():
    return DuopolyParams(alpha_n=0.7, alpha_w=0.6, beta_n=0.0, beta_w=0.0, t_b=0.0, t_c=1.2,
                         f_wb=0.15, f_nb=0.15, f_wc=0.3, f_nc=0.35)
