import pytest

from crossclone.engine import OracleAdapter
from crossclone.errors import MissingShim
from crossclone.pipeline import ShimRegistry


class InProcessRegistry(ShimRegistry):
    """Executes emitted python sources in-process via the oracle adapter, so
    pipeline tests run with no worker shim built. No timeout enforcement or
    crash isolation: subprocess behavior is covered by the engine tests."""

    def __init__(self):
        super().__init__()

    def check(self, languages):
        unsupported = set(languages) - {"python"}
        if unsupported:
            raise MissingShim(sorted(unsupported)[0], "in-process registry is python-only")

    def factory_for(self, fn):
        source = fn.source_text if hasattr(fn, "source_text") else None
        path = getattr(fn, "source_path", "")

        def make():
            text = source
            if text is None:
                with open(path) as fh:
                    text = fh.read()
            ns = {}
            exec(compile(text, path or fn.id, "exec"), ns)
            return OracleAdapter(ns[fn.entry])

        return make


@pytest.fixture
def inproc_registry():
    return InProcessRegistry()
