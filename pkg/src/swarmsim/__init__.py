"""Headless multi-drone swarm simulator.

Two decentralized steering algorithms, point-mass and quadcopter
dynamics, cylindrical obstacle fields, swarm performance metrics,
a batch CLI, and a live-steering websocket server.
"""

__version__ = "0.1.0"
