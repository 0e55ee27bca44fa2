from components.criticality import CriticalityOverview
from components.evaluation import DetectorEvaluation
from components.loss import LossCurves
from components.css.style_css import METRIC_CARDS, PADDING_TOP
