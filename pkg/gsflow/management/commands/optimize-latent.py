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
from gsflow.management.base import GsflowCommand
from gsflow.workbench import tables


class Command(GsflowCommand):
    help = _("Search for a latent whose image the quality assessor scores "
             "like real images.")
    failure = _("Unable to optimize latent.")

    def add_arguments(self, parser):
        super(Command, self).add_arguments(parser)
        parser.add_argument('--checkpoint', required=True)
        parser.add_argument('--dataset')
        parser.add_argument('--assessor',
                            help=_("Assessor checkpoint; trained when "
                                   "omitted."))

    def run(self, config, options):
        model = api.model_load(options['checkpoint'])
        dataset = api.dataset_load(config)
        if options.get('assessor'):
            assessor = api.assessor_load(options['assessor'])
        else:
            assessor = api.assessor_train(config, model, dataset)
            api.assessor_save(assessor,
                              self.output_path(config, 'assessor.ckpt'))

        for k, result in enumerate(api.latent_optimize(config, model,
                                                       assessor, dataset)):
            suffix = '' if k == 0 else '-%d' % k
            latent_path = self.output_path(config, 'latent%s.gsfl' % suffix)
            api.latent_save(result.latent, latent_path)
            tables.write_trace(
                self.output_path(config, 'trace%s.csv' % suffix),
                result.trace)
            self.report("latent %s: %d step(s), final diff %.5f"
                        % (latent_path, len(result.trace),
                           result.final_diff))
