"""
Test suite for scnewton

This package contains tests for every solver module:
- Scalar calculus and constants validation
- Local geometry and oracle composition
- Damped Newton, path-following and predictor-corrector schemes
- Barrier methods, feasibility and the LP embedding
- Cubic regularization and multi-stage restarts
- Audits, the experiment graph and the CLI
"""
