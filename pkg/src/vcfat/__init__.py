"""Analytics engine co-locating social-media posts with official crime
records, aggregated by district, category, and time bucket."""

__version__ = "0.1.0"
