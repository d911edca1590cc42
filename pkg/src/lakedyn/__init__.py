"""lakedyn: biennial lake-dynamics toolkit.

Water-occurrence compositing, windowed-attention segmentation of
occurrence rasters, lake vectorization with identity tracking across
epochs, and LSTM forecasting of lake area from climate covariates.
"""

__version__ = "0.1.0"
