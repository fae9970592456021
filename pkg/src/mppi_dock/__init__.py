"""MPPI docking of a fully actuated surface vessel."""
