"""
CSS for the dashboard

"""

PADDING_TOP = """
<style>
        .main > div {
            padding-top: 1.5rem;
            padding-bottom: 1.5rem;
        }
    </style>
"""

METRIC_CARDS = """
<style>
        div[data-testid="stMetric"] {
            border: 1px solid rgba(128, 128, 128, 0.3);
            border-radius: 0.5rem;
            padding: 0.5rem 1rem;
        }
    </style>
"""
