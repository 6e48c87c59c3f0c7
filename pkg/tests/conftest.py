import pytest

from ecgstream._backend import available_backends


@pytest.fixture(params=sorted(available_backends()))
def backend(request):
    """Run kernel-dependent tests against every importable backend."""
    return request.param
