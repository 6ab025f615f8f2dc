"""Adaptive quizzing engine with a simulation-and-analysis harness.

The package is organised around a small core:

* ``content``    -- the department/course/tutorial/lecture/slide tree
* ``items``      -- question bank, parameterised templates, answer counters
* ``allocation`` -- difficulty ranking, grade window, and the rank-based
                    probability mass function used to pick the next question
* ``anova``      -- sequential (Type-I) ANOVA, F tests, backward elimination
* ``trial``      -- randomized crossover trial simulation
* ``eventlog``   -- append-only answer log with full state replay
* ``service``    -- FastAPI app exposing the quiz over HTTP
* ``cli``        -- ``tutorweb`` command line entry point
"""

__version__ = "0.1.0"
