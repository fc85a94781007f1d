"""adswk — numerical lab for Klein–Gordon equations on asymptotically AdS spaces.

Modules
-------
geometry     metric families, compressed cotangent coordinates, indicial roots
gbbflow      generalized broken bicharacteristics: tracing and validation
modes        separated radial ODE, Frobenius series, DtN coefficients, eigenmodes
evolve       leapfrog solver for the forward problem, norms, stress-energy forms
functional   Hardy / Poincaré inequalities and the τ time-function construction
experiments  cross-module studies with hashed, persisted results
acceptance   machine-readable acceptance verdicts
cli          command-line entry point
"""

__version__ = "0.1.0"
