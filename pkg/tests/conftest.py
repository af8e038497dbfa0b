"""Shared fixtures: the workhorse parameter set used across the suite.

Cavity L = 0.74 mm, R = 5 cm, F = 23000 at 1064 nm; 50 nm slab with
n = 2 + 1e-5 i, side 0.5 mm, effective mode mass 8.5 pg; (1,1) drum mode at
Omega/2pi = 10 MHz with Q = 6e6; membrane parked at z0 = lambda/8 (steepest
slope of the intracavity standing wave) unless a test moves it.
"""

import math

import pytest

from membrane_cavity import (CavityGeometry, MembraneSlab, ModeIndices,
                             VibrationalMode)

LAMBDA = 1.064e-6
OMEGA_M = 2.0 * math.pi * 1.0e7
MASS = 8.5e-12
SIDE = 5e-4
SIGMA = 4.0 * MASS / SIDE ** 2          # keeps the (j,k) mode mass at MASS
P_LONG = 1391                           # longitudinal order nearest 1064 nm


def make_cavity(finesse=23000.0, length=7.4e-4, curvature=5e-2):
    return CavityGeometry(length, curvature, finesse, LAMBDA)


def make_membrane(z0=LAMBDA / 8.0, n_imag=1e-5, thickness=5e-8):
    return MembraneSlab(2.0, n_imag, thickness, SIDE, SIGMA, z0)


def make_vib():
    return VibrationalMode(1, 1, OMEGA_M, MASS, 6e6)


@pytest.fixture
def cav():
    return make_cavity()


@pytest.fixture
def mem():
    return make_membrane()


@pytest.fixture
def vib():
    return make_vib()


@pytest.fixture
def idx():
    return ModeIndices(0, 0, P_LONG)


@pytest.fixture
def k0(cav):
    # evaluation wavevector of the shift formulas: the drive wavelength
    return cav.laser_k
