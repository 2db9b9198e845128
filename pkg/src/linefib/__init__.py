"""Line fibrations of R^3, their plane fields, and the contact condition."""

__version__ = "0.1.0"
