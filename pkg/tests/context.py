# pylint: disable=unused-import,wrong-import-position

"""Puts the repository root on the path so the tests import the working copy."""

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import plane_navier_stokes
