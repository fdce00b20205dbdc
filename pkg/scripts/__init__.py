import os

os.environ.setdefault("BALANCER_ROOT", ".")
