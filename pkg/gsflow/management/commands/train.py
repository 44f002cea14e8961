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
    help = _("Train a flow and write flow.ckpt and loss.csv.")
    failure = _("Unable to train flow.")

    def add_arguments(self, parser):
        super(Command, self).add_arguments(parser)
        parser.add_argument('--dataset',
                            help=_("Image directory or synthetic:seed=..."))
        parser.add_argument('--epochs', type=int)

    def run(self, config, options):
        dataset = api.dataset_load(config)
        ckpt = self.output_path(config, 'flow.ckpt')
        result = api.model_train(config, dataset, ckpt)
        api.model_save(result.model, ckpt)
        tables.write_loss_curve(self.output_path(config, 'loss.csv'),
                                result.loss_curve)
        self.report("checkpoint %s" % ckpt)
        if result.final_eval_bpd is not None:
            self.report("eval bits/dim %.4f -> %.4f"
                        % (result.initial_eval_bpd, result.final_eval_bpd))
