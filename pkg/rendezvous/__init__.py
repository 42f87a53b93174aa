# Rendezvous package: UAV landing on a moving UGV by constrained trajectory optimization
__version__ = "1.0.0"
