"""Spherical geodesy helpers shared by ingest, features, and synth."""

from __future__ import annotations

import numpy as np

EARTH_RADIUS_NM = 3440.065
FEET_PER_NM = 6076.12


def great_circle_nm(lat1, lon1, lat2, lon2):
    """Haversine distance in nautical miles between two points.

    Accepts scalars or numpy arrays (broadcast like any ufunc expression).
    Symmetric and non-negative; zero for coincident points.
    """
    phi1 = np.radians(lat1)
    phi2 = np.radians(lat2)
    dphi = np.radians(np.subtract(lat2, lat1))
    dlam = np.radians(np.subtract(lon2, lon1))
    a = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2.0) ** 2
    a = np.clip(a, 0.0, 1.0)
    return EARTH_RADIUS_NM * 2.0 * np.arcsin(np.sqrt(a))


def initial_bearing_deg(lat1, lon1, lat2, lon2):
    """Forward azimuth from point 1 to point 2, degrees in [0, 360)."""
    phi1 = np.radians(lat1)
    phi2 = np.radians(lat2)
    dlam = np.radians(np.subtract(lon2, lon1))
    y = np.sin(dlam) * np.cos(phi2)
    x = np.cos(phi1) * np.sin(phi2) - np.sin(phi1) * np.cos(phi2) * np.cos(dlam)
    return np.degrees(np.arctan2(y, x)) % 360.0


def destination_point(lat, lon, bearing_deg, dist_nm):
    """Point reached from (lat, lon) after dist_nm along the given bearing."""
    phi1 = np.radians(lat)
    lam1 = np.radians(lon)
    theta = np.radians(bearing_deg)
    delta = np.asarray(dist_nm) / EARTH_RADIUS_NM
    phi2 = np.arcsin(
        np.sin(phi1) * np.cos(delta) + np.cos(phi1) * np.sin(delta) * np.cos(theta)
    )
    lam2 = lam1 + np.arctan2(
        np.sin(theta) * np.sin(delta) * np.cos(phi1),
        np.cos(delta) - np.sin(phi1) * np.sin(phi2),
    )
    lon2 = (np.degrees(lam2) + 540.0) % 360.0 - 180.0
    return np.degrees(phi2), lon2


def heading_change_deg(h1, h2):
    """Smallest angle between two headings, degrees in [0, 180]."""
    d = np.abs(np.asarray(h2) - np.asarray(h1)) % 360.0
    return np.minimum(d, 360.0 - d)
