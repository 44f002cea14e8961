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
from gsflow.codec import plan as plan_mod
from gsflow.management.base import GsflowCommand


class Command(GsflowCommand):
    help = _("Recover the payload from a stego image.")
    failure = _("Unable to extract payload.")

    def add_arguments(self, parser):
        super(Command, self).add_arguments(parser)
        parser.add_argument('--checkpoint', required=True)
        parser.add_argument('--image', required=True)
        parser.add_argument('--metadata',
                            help=_("Metadata file; defaults to the image "
                                   "path plus .json."))
        parser.add_argument('--plan',
                            help=_("Override the plan in the metadata."))
        parser.add_argument('--reference',
                            help=_("Payload file to compute Acc against."))

    def run(self, config, options):
        model = api.model_load(options['checkpoint'])
        metadata = api.metadata_load(options['image'],
                                     options.get('metadata'))
        plan = None
        if options.get('plan'):
            plan = plan_mod.parse_plan(options['plan'])
        payload = api.stego_extract(model, options['image'], metadata, plan)
        out = self.output_path(config, 'extracted.bin')
        api.payload_save(payload, out)
        self.report("extracted %d bits to %s" % (len(payload), out))

        if options.get('reference'):
            reference = api.payload_load(options['reference'], len(payload))
            value = pipeline.acc(reference, payload)
            self.report("acc %s" % ('' if value is None else '%.6f' % value))
