import os
import sys

# the solver loops are many small BLAS calls; multithreaded BLAS spin-waits
# dominate them on small machines, so pin everything to one thread
for var in ('OPENBLAS_NUM_THREADS', 'OMP_NUM_THREADS', 'MKL_NUM_THREADS'):
    os.environ.setdefault(var, '1')

try:
    import threadpoolctl
    threadpoolctl.threadpool_limits(1)
except ImportError:
    pass

sys.path.insert(0, os.path.dirname(__file__))
