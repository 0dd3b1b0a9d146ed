"""Draw-down criticality analysis of daily price series.

Draw-downs below a trailing six-month ceiling are split at the depth where
the smaller draw-downs look Gaussian (excess kurtosis closest to zero); the
deeper ones are fitted with a continuous power law and the result is checked
against seeded random-walk controls.
"""

__version__ = "0.1.0"
