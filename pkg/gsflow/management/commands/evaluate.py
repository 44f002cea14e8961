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
from gsflow.workbench import tables


class Command(GsflowCommand):
    help = _("Write the Acc table, bit-plane profile and PE report.")
    failure = _("Unable to evaluate.")

    def add_arguments(self, parser):
        super(Command, self).add_arguments(parser)
        self.add_plan_arguments(parser)
        parser.add_argument('--checkpoint', required=True)
        parser.add_argument('--latent',
                            help=_("Optimized latent to report as a second "
                                   "source."))
        parser.add_argument('--trials', type=int)

    def run(self, config, options):
        model = api.model_load(options['checkpoint'])
        optimized = None
        if options.get('latent'):
            optimized = api.latent_load(options['latent'])

        rows = api.table_run(config, model, optimized)
        tables.write_table(self.output_path(config, 'table.csv'), rows)
        tables.write_planes(self.output_path(config, 'planes.csv'),
                            api.planes_run(config, model),
                            pipeline.PLANE_LABELS)

        report, heldout = api.steganalysis_run(config, model)
        tables.write_pe(self.output_path(config, 'pe.csv'), report, heldout,
                        heldout, config.plan.descriptor, config.channel)
        tables.write_roc(self.output_path(config, 'roc.csv'), report)
        self.report("%d table rows, PE %.4f" % (len(rows), report.pe))
