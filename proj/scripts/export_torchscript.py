"""Export pretrained networks as TorchScript archives for the s2r tools.

  vgg16      ImageNet VGG16 conv stack, loaded as backbone.weights_path
  inception  Inception-v3 pool features (N×2048), usable as metrics.embedder_path
  segmenter  any torchvision segmentation model returning logits, as metrics.segmenter_path

Weights are fetched by torchvision, so this needs network access or a populated
torch hub cache.
"""
import argparse

import torch
import torchvision


class Features(torch.nn.Module):
    def __init__(self, body):
        super().__init__()
        self.body = body

    def forward(self, x):
        return self.body(x)


class InceptionPool(torch.nn.Module):
    def __init__(self, net):
        super().__init__()
        net.fc = torch.nn.Identity()
        self.net = net.eval()
        self.register_buffer("mean", torch.tensor([0.485, 0.456, 0.406]).view(1, 3, 1, 1))
        self.register_buffer("std", torch.tensor([0.229, 0.224, 0.225]).view(1, 3, 1, 1))

    def forward(self, x):
        # [-1, 1] RGB in, ImageNet-normalized 299×299 into the network.
        x = (x + 1) / 2
        x = torch.nn.functional.interpolate(x, size=(299, 299), mode="bilinear", align_corners=False)
        return self.net((x - self.mean) / self.std)


class SegLogits(torch.nn.Module):
    def __init__(self, net):
        super().__init__()
        self.net = net.eval()

    def forward(self, x):
        return self.net((x + 1) / 2)["out"]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("what", choices=["vgg16", "inception", "segmenter"])
    ap.add_argument("out")
    ap.add_argument("--segmenter-arch", default="deeplabv3_resnet50")
    ap.add_argument("--segmenter-weights", help="state_dict trained on the target label set")
    ap.add_argument("--num-classes", type=int, default=34)
    ap.add_argument("--random-init", action="store_true", help="skip the weight download (format checks only)")
    args = ap.parse_args()

    if args.what == "vgg16":
        net = torchvision.models.vgg16(weights=None if args.random_init else torchvision.models.VGG16_Weights.IMAGENET1K_V1)
        module = Features(net.features.eval())
        example = torch.zeros(1, 3, 64, 64)
    elif args.what == "inception":
        net = torchvision.models.inception_v3(
            weights=None if args.random_init else torchvision.models.Inception_V3_Weights.IMAGENET1K_V1,
            aux_logits=True,
            init_weights=False,
        )
        module = InceptionPool(net)
        example = torch.zeros(1, 3, 64, 128)
    else:
        ctor = getattr(torchvision.models.segmentation, args.segmenter_arch)
        net = ctor(weights=None, weights_backbone=None, num_classes=args.num_classes, aux_loss=False)
        if args.segmenter_weights:
            net.load_state_dict(torch.load(args.segmenter_weights, map_location="cpu"))
        module = SegLogits(net)
        example = torch.zeros(1, 3, 64, 128)

    for p in module.parameters():
        p.requires_grad_(False)
    traced = torch.jit.trace(module.eval(), example, strict=False)
    traced.save(args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
