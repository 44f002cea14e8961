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

import logging

from django import forms
from django.utils.translation import gettext_lazy as _

from gsflow.channel import pipeline
from gsflow.codec import plan as plan_mod
from gsflow import exceptions

LOG = logging.getLogger(__name__)


class RunConfigForm(forms.Form):
    """Validates a merged key-value configuration before any work starts."""

    height = forms.IntegerField(label=_("Image height"), min_value=2)
    width = forms.IntegerField(label=_("Image width"), min_value=2)
    levels = forms.IntegerField(label=_("Levels (L)"), min_value=1)
    steps = forms.IntegerField(label=_("Steps per level (K)"), min_value=1)
    hidden = forms.IntegerField(label=_("Coupling hidden width"),
                                min_value=1)
    delta = forms.FloatField(label=_("Sampling temperature"))

    dataset = forms.CharField(label=_("Dataset"), required=False)
    eval_fraction = forms.FloatField(label=_("Eval fraction"),
                                     min_value=0.0, max_value=0.9)
    epochs = forms.IntegerField(label=_("Epochs"), min_value=0)
    batch_size = forms.IntegerField(label=_("Batch size"), min_value=1)
    lr = forms.FloatField(label=_("Learning rate"))
    checkpoint_interval = forms.IntegerField(
        label=_("Checkpoint interval"), min_value=1)
    dequantize = forms.BooleanField(label=_("Dequantize"), required=False)
    clip_norm = forms.FloatField(label=_("Gradient clip norm"))

    assessor_epochs = forms.IntegerField(label=_("Assessor epochs"),
                                         min_value=1)
    generated = forms.IntegerField(label=_("Generated images"), min_value=2)
    epsilon = forms.FloatField(label=_("Latent step size"), min_value=0.0)
    n = forms.IntegerField(label=_("Reference images"), min_value=1)
    thresh = forms.FloatField(label=_("Stop threshold"))
    max_step = forms.IntegerField(label=_("Max steps"), min_value=1)
    restarts = forms.IntegerField(label=_("Restarts"), min_value=1)
    restart_noise = forms.FloatField(label=_("Restart noise"),
                                     min_value=0.0)

    plan = forms.CharField(label=_("Bit plan"))
    channel = forms.ChoiceField(
        label=_("Channel"),
        choices=[(pipeline.U8, _('Quantized 8-bit')),
                 (pipeline.FLOAT, _('Lossless float32'))])
    trials = forms.IntegerField(label=_("Trials"), min_value=1)
    steganalysis_images = forms.IntegerField(
        label=_("Steganalysis images"), min_value=4)
    seed = forms.IntegerField(label=_("Seed"), min_value=0)
    output = forms.CharField(label=_("Output directory"))

    checkpoint = forms.CharField(label=_("Flow checkpoint"), required=False)
    payload = forms.CharField(label=_("Payload file"), required=False)
    payload_bits = forms.IntegerField(label=_("Payload bits"), min_value=0,
                                      required=False)
    latent = forms.CharField(label=_("Latent file"), required=False)
    assessor = forms.CharField(label=_("Assessor checkpoint"),
                               required=False)
    image = forms.CharField(label=_("Stego image"), required=False)
    metadata = forms.CharField(label=_("Stego metadata"), required=False)
    reference = forms.CharField(label=_("Reference payload"),
                                required=False)

    def _positive(self, name):
        value = self.cleaned_data[name]
        if not value > 0:
            raise forms.ValidationError(_("Must be positive."))
        return value

    def clean_delta(self):
        return self._positive('delta')

    def clean_lr(self):
        return self._positive('lr')

    def clean_clip_norm(self):
        return self._positive('clip_norm')

    def clean_plan(self):
        try:
            return plan_mod.parse_plan(self.cleaned_data['plan'])
        except exceptions.ConfigError as exc:
            raise forms.ValidationError(str(exc))

    def clean(self):
        cleaned = super(RunConfigForm, self).clean()
        levels = cleaned.get('levels')
        for dim in ('height', 'width'):
            value = cleaned.get(dim)
            if value and levels and value % (2 ** levels):
                self.add_error(dim, _("Must be divisible by 2**levels."))
        return cleaned
