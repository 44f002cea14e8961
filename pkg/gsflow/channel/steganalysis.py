# Licensed under the Apache License, Version 2.0 (the "License"); you may
# not use this file except in compliance with the License. You may obtain
# a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations
# under the License.

"""Stand-in steganalyzer and detection-error (PE) measurement.

Features are statistics of the 3x3 Laplacian residual of each colour
channel, fed to a logistic regression. Cover is the negative class and
stego the positive one; a higher score means "stego".
"""

import logging

import numpy as np
from scipy import ndimage
from sklearn import linear_model
from sklearn import metrics
from sklearn import model_selection
from sklearn import pipeline
from sklearn import preprocessing

from gsflow import exceptions
from gsflow.flow.model import to_pixels

LOG = logging.getLogger(__name__)

LAPLACIAN = np.array([[0.0, 1.0, 0.0],
                      [1.0, -4.0, 1.0],
                      [0.0, 1.0, 0.0]])
HIST_EDGES = np.arange(-8.5, 9.5, 1.0)


def residual_features(images):
    """Feature rows for model-domain images of shape (N, H, W, 3)."""
    pixels = to_pixels(images).astype(np.float64)
    rows = []
    for image in pixels:
        feats = []
        hist = np.zeros(len(HIST_EDGES) - 1)
        for c in range(image.shape[-1]):
            res = ndimage.convolve(image[..., c], LAPLACIAN, mode='reflect')
            var = res.var()
            feats.extend([np.abs(res).mean(), np.sqrt(var),
                          (res ** 4).mean() / (var * var + 1e-12),
                          np.mean(np.abs(res) < 0.5)])
            hist += np.histogram(np.clip(res, -8, 8), HIST_EDGES)[0]
        feats.extend(hist / hist.sum())
        rows.append(feats)
    return np.asarray(rows)


class PeReport(object):
    """Minimum error probability and the sweep it was read from.

    ``roc`` is the (fpr, tpr, thresholds) triple of the detector scores.
    """

    def __init__(self, pe, threshold, thresholds, p_fa, p_md, auc, roc):
        self.pe = pe
        self.threshold = threshold
        self.thresholds = thresholds
        self.p_fa = p_fa
        self.p_md = p_md
        self.auc = auc
        self.roc = roc


def sweep(cover_scores, stego_scores):
    """(thresholds, P_FA, P_MD) for "stego if score > t".

    Thresholds are -inf, every midpoint of the sorted unique scores and
    +inf, which covers every distinct split of the two sets.
    """
    cover = np.sort(np.asarray(cover_scores, dtype=np.float64))
    stego = np.sort(np.asarray(stego_scores, dtype=np.float64))
    unique = np.unique(np.concatenate([cover, stego]))
    thresholds = np.concatenate([[-np.inf], (unique[:-1] + unique[1:]) / 2,
                                 [np.inf]])
    p_fa = 1.0 - np.searchsorted(cover, thresholds, 'right') / len(cover)
    p_md = np.searchsorted(stego, thresholds, 'right') / len(stego)
    return thresholds, p_fa, p_md


def pe_from_scores(cover_scores, stego_scores):
    if len(cover_scores) == 0 or len(stego_scores) == 0:
        raise exceptions.DatasetError("PE needs cover and stego scores")
    thresholds, p_fa, p_md = sweep(cover_scores, stego_scores)
    errors = 0.5 * (p_fa + p_md)
    best = int(np.argmin(errors))
    labels = np.concatenate([np.zeros(len(cover_scores)),
                             np.ones(len(stego_scores))])
    scores = np.concatenate([cover_scores, stego_scores])
    fpr, tpr, roc_thresholds = metrics.roc_curve(labels, scores)
    return PeReport(float(errors[best]), float(thresholds[best]), thresholds,
                    p_fa, p_md, float(metrics.roc_auc_score(labels, scores)),
                    (fpr, tpr, roc_thresholds))


class Steganalyzer(object):
    """Residual features -> standardisation -> logistic regression.

    Cover and stego sets are split with the same indices so that paired
    images land on the same side.
    """

    def __init__(self, seed=0, test_size=0.5):
        self.seed = seed
        self.test_size = test_size
        self.classifier = pipeline.make_pipeline(
            preprocessing.StandardScaler(),
            linear_model.LogisticRegression(max_iter=1000))
        self.heldout_cover = None
        self.heldout_stego = None

    def _split(self, images):
        return model_selection.train_test_split(
            images, test_size=self.test_size, random_state=self.seed)

    def fit(self, cover, stego):
        if len(cover) < 2 or len(stego) < 2:
            raise exceptions.DatasetError(
                "steganalysis needs at least two cover and two stego images")
        if cover.shape[1:] != stego.shape[1:]:
            raise exceptions.ShapeError('steganalysis', cover.shape[1:],
                                        stego.shape[1:])
        cover_train, self.heldout_cover = self._split(cover)
        stego_train, self.heldout_stego = self._split(stego)
        features = residual_features(np.concatenate([cover_train,
                                                     stego_train]))
        labels = np.concatenate([np.zeros(len(cover_train)),
                                 np.ones(len(stego_train))])
        self.classifier.fit(features, labels)
        LOG.info("Steganalyzer trained on %d cover / %d stego images",
                 len(cover_train), len(stego_train))
        return self

    def score(self, images):
        return self.classifier.decision_function(residual_features(images))


def train_steganalyzer(cover, stego, seed=0, test_size=0.5):
    return Steganalyzer(seed, test_size).fit(cover, stego)


def pe(classifier, cover=None, stego=None):
    """PE of ``classifier``; defaults to its held-out split."""
    cover = classifier.heldout_cover if cover is None else cover
    stego = classifier.heldout_stego if stego is None else stego
    report = pe_from_scores(classifier.score(cover), classifier.score(stego))
    LOG.info("PE %.4f (AUC %.4f)", report.pe, report.auc)
    return report
