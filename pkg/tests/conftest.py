import pytest

from proxindex.builder import Document
from proxindex.lexicon import FLList, Lexicon, load_dictionary


def ranked_lexicon(fls, size=None, dictionary=None):
    """Lexicon where each named lemma sits at the given FL-number; other ranks are fillers."""
    size = size or max(fls.values()) + 1
    by_rank = {fl: name for name, fl in fls.items()}
    names = [by_rank.get(r, f"filler{r}") for r in range(size)]
    return Lexicon(dictionary if dictionary is not None else {}, FLList.from_ranking(names))


def docs_of(*texts):
    return [Document(f"d{i}", t) for i, t in enumerate(texts)]


@pytest.fixture(scope="session")
def dictionary():
    return load_dictionary()


# -- acceptance summary ---------------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        # a criterion checked by several tests passes only if all of them do
        number, title = mark.args
        prev = _ACCEPTANCE.get(number)
        if prev is None:
            _ACCEPTANCE[number] = (title.split(":")[0], rep.outcome)
        elif rep.outcome != "passed":
            _ACCEPTANCE[number] = (prev[0], rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, outcome = _ACCEPTANCE[n]
        word = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{word}] criterion {n}: {title}")
