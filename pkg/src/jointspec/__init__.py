"""Joint spectra of finite sets of matrices: Cartan/Jordan clouds, proximality
and Schottky certificates, random products, and SL(2,R) pair geometry."""
from .errors import JointSpectrumError
from .matgroup import CARTAN, JORDAN, GroupFrame, cartan, jordan
from .spectrum import (FULL, NECKLACE, enumerate_level, estimate_joint_spectrum, jsr)
from .proximal import analyze_proximal, domination_rate, schottky_check
from .randprod import IIDSpec, clt_covariance, lyapunov_iid, realize_lyapunov
from .hyp2 import axes_geometry, classify, nonpoly_boundary, paper_pair, ratio_curve

__version__ = "0.1.0"
