"""Domain services: linear algebra, channels, measures, circuits and reductions."""
