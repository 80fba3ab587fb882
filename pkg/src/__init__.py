"""
gridrisk: forecast-reliability toolkit for grid load forecasting
"""
__version__ = "0.1.0"
