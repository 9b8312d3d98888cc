import sys
from pathlib import Path

import pytest

from streamrec.core import InteractionEvent, RankedList

sys.path.insert(0, str(Path(__file__).parent))


class FixedListRecommender:
    """Knows users it has been updated with; always proposes the same list."""

    def __init__(self, ranking):
        self.ranking = list(ranking)
        self.users = set()
        self.updates = []
        self.excludes = []

    def update(self, event):
        self.users.add(event.user)
        self.updates.append((event.user, event.item))

    def knows_user(self, user):
        return user in self.users

    def knows_item(self, item):
        return item in self.ranking

    def score(self, user, item):
        return None

    def recommend(self, user, n, exclude=frozenset()):
        self.excludes.append(frozenset(exclude))
        items = [i for i in self.ranking if i not in exclude][:n]
        return RankedList(items, [1.0] * len(items))


@pytest.fixture
def fixed_list():
    return FixedListRecommender


def events(*pairs):
    return [InteractionEvent(u, i) for u, i in pairs]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
