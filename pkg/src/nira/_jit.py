"""JIT plumbing shared by the scalar-math modules.

``register_jitable`` lets the same plain-Python scalar functions run both
interpreted (numpy fallback backend) and inside ``@njit`` kernels. When numba
is missing the decorator degrades to a no-op and only the numpy backend is
usable.
"""

try:
    from numba.extending import register_jitable

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def register_jitable(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# Shared options for all hot kernels. fastmath stays off: reproducibility of
# outputs across runs is part of the CLI contract.
JIT_OPTIONS = {"cache": True, "nogil": True}
