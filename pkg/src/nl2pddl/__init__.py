"""Natural-language to PDDL model acquisition with a built-in planner and validator."""

__version__ = "0.1.0"
