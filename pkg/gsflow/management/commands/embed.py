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

from django.utils.translation import gettext_lazy as _

from gsflow.api import gsflow as api
from gsflow.channel import pipeline
from gsflow.management.base import GsflowCommand


class Command(GsflowCommand):
    help = _("Hide a payload file in a generated stego image.")
    failure = _("Unable to embed payload.")

    def add_arguments(self, parser):
        super(Command, self).add_arguments(parser)
        self.add_plan_arguments(parser)
        parser.add_argument('--checkpoint', required=True)
        parser.add_argument('--payload', required=True)
        parser.add_argument('--payload-bits', type=int,
                            help=_("Payload length in bits; defaults to "
                                   "the sidecar or the whole file."))
        parser.add_argument('--latent',
                            help=_("Latent file; a random latent is drawn "
                                   "when omitted."))
        parser.add_argument('--image', help=_("Stego image file name."))

    def run(self, config, options):
        model = api.model_load(options['checkpoint'])
        payload = api.payload_load(options['payload'],
                                   options.get('payload_bits'))
        if options.get('latent'):
            latent = api.latent_load(options['latent'])
        else:
            latent = api.latent_sample(config, model)

        default = ('stego.npy' if config.channel == pipeline.FLOAT
                   else 'stego.png')
        image_path = self.output_path(config, options.get('image') or default)
        metadata = api.stego_create(config, model, latent, payload,
                                    image_path)
        self.report("stego image %s: %d bits, %g bpp, plan %s"
                    % (image_path, metadata['payload_bits'],
                       metadata['bpp'], metadata['plan']))
