"""tutorlab: a desk-scale tutoring research platform.

Example-tracing tutor engine, BKT student model, task selection, DataShop-
style logging, learning analytics, an LMS-style experiment service, and a
headless harness for simulated studies.
"""

__version__ = "0.1.0"
